use contact_bench::graphs::{centroid_vertex, prufer_decode, split_edge_balanced, Graph};

/// Calls `f` with every labeled tree on `n` vertices.
fn for_each_labeled_tree(n: usize, mut f: impl FnMut(&Graph)) {
    if n == 1 {
        return f(&Graph::new(1, []).unwrap());
    }
    if n == 2 {
        return f(&Graph::new(2, [(0, 1)]).unwrap());
    }
    let len = n - 2;
    let mut code = vec![0; len];
    loop {
        f(&prufer_decode(&code, n).unwrap());
        let mut i = 0;
        while i < len && code[i] == n - 1 {
            code[i] = 0;
            i += 1;
        }
        if i == len {
            break;
        }
        code[i] += 1;
    }
}

#[test]
fn labeled_tree_counts_follow_cayley() {
    for n in 1..=6 {
        let mut count = 0;
        for_each_labeled_tree(n, |t| {
            assert!(t.is_tree());
            count += 1;
        });
        assert_eq!(count, n.pow(n.saturating_sub(2) as u32));
    }
}

#[test]
fn balanced_split_sides_are_large_on_every_small_tree() {
    for n in 2..=7 {
        for_each_labeled_tree(n, |t| {
            for d in t.max_degree().max(2)..n {
                let s = split_edge_balanced(t, d).unwrap_or_else(|e| panic!("{:?} d={d}: {e}", t.edges()));
                let floor = n / d;
                assert!(s.side_a.len() >= floor && s.side_b.len() >= floor, "{t:?} d={d} {s:?}");
                assert_eq!(s.side_a.len() + s.side_b.len(), n);
            }
        });
    }
}

#[test]
fn unit_degree_bound_is_rejected() {
    let k2 = Graph::new(2, [(0, 1)]).unwrap();
    assert!(split_edge_balanced(&k2, 1).is_err());
}

#[test]
fn centroid_components_are_at_most_half_on_every_small_tree() {
    for n in 1..=7 {
        for_each_labeled_tree(n, |t| {
            let c = centroid_vertex(t).unwrap();
            let rest: Vec<usize> = (0..n).filter(|&v| v != c).collect();
            let (sub, _) = t.induced(&rest);
            for comp in sub.components() {
                assert!(2 * comp.len() <= n, "{t:?} centroid {c}");
            }
        });
    }
}
