use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::{Graph, Vertex};
use crate::error::{Error, Result};

/// The two subtrees left after deleting one edge of a tree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeSplit {
    pub removed_edge: (Vertex, Vertex),
    /// Side containing `removed_edge.0`, sorted.
    pub side_a: Vec<Vertex>,
    /// Side containing `removed_edge.1`, sorted.
    pub side_b: Vec<Vertex>,
}

/// Union of two disjoint subtrees and the shortest path joining them.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Bridge {
    pub graph: Graph,
    /// Global ids of the bridge's vertices; `graph` vertex `i` is `vertices[i]`.
    pub vertices: Vec<Vertex>,
    pub distance: usize,
    /// `|part_i| + |part_j| + distance - 1`.
    pub sigma: usize,
}

/// Parent pointers and subtree sizes of a tree rooted at vertex 0.
struct Rooted {
    parent: Vec<Option<Vertex>>,
    size: Vec<usize>,
}

fn root_at_zero(t: &Graph) -> Rooted {
    let n = t.n_vertices();
    let mut parent = vec![None; n];
    let mut order = Vec::with_capacity(n);
    let mut visited = vec![false; n];
    if n > 0 {
        visited[0] = true;
        order.push(0);
    }
    let mut i = 0;
    while i < order.len() {
        let u = order[i];
        i += 1;
        for &w in t.neighbors(u) {
            if !visited[w] {
                visited[w] = true;
                parent[w] = Some(u);
                order.push(w);
            }
        }
    }
    let mut size = vec![1usize; n];
    for &u in order.iter().rev() {
        if let Some(p) = parent[u] {
            size[p] += size[u];
        }
    }
    Rooted { parent, size }
}

fn require_tree(t: &Graph, op: &str) -> Result<()> {
    if t.is_tree() {
        Ok(())
    } else {
        Err(Error::Precondition(format!("{op} requires a tree")))
    }
}

/// Vertices reachable from `start` without using the edge `{a, b}`.
fn side_without_edge(t: &Graph, start: Vertex, cut: (Vertex, Vertex)) -> Vec<Vertex> {
    let mut seen = vec![false; t.n_vertices()];
    seen[start] = true;
    let mut stack = vec![start];
    let mut out = Vec::new();
    while let Some(u) = stack.pop() {
        out.push(u);
        for &w in t.neighbors(u) {
            let crossing = (u == cut.0 && w == cut.1) || (u == cut.1 && w == cut.0);
            if !crossing && !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    out.sort_unstable();
    out
}

/// Breadth-first spanning tree from vertex 0, scanning neighbors in
/// ascending order.
pub fn spanning_tree(g: &Graph) -> Result<Graph> {
    if g.n_vertices() == 0 {
        return Err(Error::InvalidSize {
            what: "spanning tree input",
            got: 0,
        });
    }
    let dist = g.bfs_distances(0);
    if let Some(b) = dist.iter().position(Option::is_none) {
        return Err(Error::Disconnected { a: 0, b });
    }
    let mut seen = vec![false; g.n_vertices()];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    let mut edges = Vec::with_capacity(g.n_vertices() - 1);
    while let Some(u) = queue.pop_front() {
        for &w in g.neighbors(u) {
            if !seen[w] {
                seen[w] = true;
                edges.push((u, w));
                queue.push_back(w);
            }
        }
    }
    Graph::new(g.n_vertices(), edges)
}

/// Removes the edge whose larger side is smallest, among edges leaving both
/// sides with at least `floor(n / d)` vertices. Ties go to the smallest edge.
pub fn split_edge_balanced(t: &Graph, d: usize) -> Result<TreeSplit> {
    require_tree(t, "split_edge_balanced")?;
    let n = t.n_vertices();
    if n < 2 {
        return Err(Error::Precondition("a split needs at least 2 vertices".into()));
    }
    if d >= n {
        return Err(Error::Precondition(format!(
            "degree bound {d} must be smaller than the tree size {n}"
        )));
    }
    // d = 1 admits only the single edge, whose sides (1 and 1) miss floor(2/1).
    if d < 2 {
        return Err(Error::Precondition("degree bound must be at least 2".into()));
    }
    if t.max_degree() > d {
        return Err(Error::Precondition(format!(
            "tree has a vertex of degree {} above the bound {d}",
            t.max_degree()
        )));
    }
    let floor = n / d;
    let rooted = root_at_zero(t);
    let mut best: Option<((Vertex, Vertex), usize)> = None;
    for &(u, v) in t.edges() {
        let child = if rooted.parent[v] == Some(u) { v } else { u };
        let small = rooted.size[child].min(n - rooted.size[child]);
        let large = n - small;
        if small < floor {
            continue;
        }
        if best.map_or(true, |(_, b)| large < b) {
            best = Some(((u, v), large));
        }
    }
    let (edge, _) = best.ok_or_else(|| {
        Error::Defect(format!("no edge leaves both sides with {floor} vertices"))
    })?;
    Ok(TreeSplit {
        removed_edge: edge,
        side_a: side_without_edge(t, edge.0, edge),
        side_b: side_without_edge(t, edge.1, edge),
    })
}

/// Smallest-id vertex whose removal leaves components of size at most `n/2`.
pub fn centroid_vertex(t: &Graph) -> Result<Vertex> {
    require_tree(t, "centroid_vertex")?;
    let n = t.n_vertices();
    let rooted = root_at_zero(t);
    let mut largest = vec![0usize; n];
    for v in 0..n {
        largest[v] = n - rooted.size[v];
    }
    for v in 0..n {
        if let Some(p) = rooted.parent[v] {
            largest[p] = largest[p].max(rooted.size[v]);
        }
    }
    (0..n)
        .find(|&v| 2 * largest[v] <= n)
        .ok_or_else(|| Error::Defect("tree without a centroid".into()))
}

/// Components of `t` minus `x`, each sorted, ordered by the neighbor of `x`
/// they contain.
pub(crate) fn components_around(t: &Graph, x: Vertex) -> Vec<Vec<Vertex>> {
    t.neighbors(x)
        .iter()
        .map(|&y| side_without_edge(t, y, (x, y)))
        .collect()
}

/// Repeatedly splits the largest remaining piece with [`split_edge_balanced`]
/// until `n_parts` pieces exist, each of size at least `min_size`.
pub fn iterated_split(
    t: &Graph,
    n_parts: usize,
    min_size: usize,
    degree_bound: usize,
) -> Result<Vec<Vec<Vertex>>> {
    require_tree(t, "iterated_split")?;
    if n_parts == 0 {
        return Err(Error::Parameter("n_parts must be at least 1".into()));
    }
    if t.max_degree() > degree_bound {
        return Err(Error::Precondition(format!(
            "tree has a vertex of degree {} above the bound {degree_bound}",
            t.max_degree()
        )));
    }
    let all: Vec<Vertex> = (0..t.n_vertices()).collect();
    if all.len() < min_size {
        return Err(Error::Infeasible { achieved: 0 });
    }
    let mut pieces = vec![all];
    while pieces.len() < n_parts {
        let idx = (0..pieces.len())
            .max_by(|&a, &b| {
                pieces[a]
                    .len()
                    .cmp(&pieces[b].len())
                    .then(pieces[b][0].cmp(&pieces[a][0]))
            })
            .expect("at least one piece");
        let size = pieces[idx].len();
        if size < 2 || degree_bound == 0 || size / degree_bound < min_size {
            return Err(Error::Infeasible {
                achieved: pieces.len(),
            });
        }
        let (a, b) = if size == 2 {
            (vec![pieces[idx][0]], vec![pieces[idx][1]])
        } else {
            let (sub, global) = t.induced(&pieces[idx]);
            let split = split_edge_balanced(&sub, degree_bound.clamp(2, size - 1))?;
            (
                split.side_a.iter().map(|&v| global[v]).collect::<Vec<_>>(),
                split.side_b.iter().map(|&v| global[v]).collect::<Vec<_>>(),
            )
        };
        if size == 2 && min_size > 1 {
            return Err(Error::Infeasible {
                achieved: pieces.len(),
            });
        }
        if a.len() < min_size || b.len() < min_size {
            return Err(Error::Defect(format!(
                "split of a {size}-vertex piece produced sides {} and {}",
                a.len(),
                b.len()
            )));
        }
        pieces.swap_remove(idx);
        pieces.push(a);
        pieces.push(b);
    }
    pieces.sort_by_key(|p| p[0]);
    Ok(pieces)
}

fn check_part(g: &Graph, part: &[Vertex], name: &str) -> Result<()> {
    if part.is_empty() {
        return Err(Error::Precondition(format!("{name} is empty")));
    }
    if let Some(&v) = part.iter().find(|&&v| v >= g.n_vertices()) {
        return Err(Error::Precondition(format!("{name} contains unknown vertex {v}")));
    }
    let (sub, _) = g.induced(part);
    if sub.n_vertices() != part.len() {
        return Err(Error::Precondition(format!("{name} lists a vertex twice")));
    }
    if !sub.is_connected() {
        return Err(Error::Precondition(format!("{name} is not connected")));
    }
    Ok(())
}

/// Joins two disjoint connected parts of a tree through the shortest path
/// between them.
pub fn bridge_subgraph(g: &Graph, part_i: &[Vertex], part_j: &[Vertex]) -> Result<Bridge> {
    require_tree(g, "bridge_subgraph")?;
    check_part(g, part_i, "part_i")?;
    check_part(g, part_j, "part_j")?;
    let n = g.n_vertices();
    let mut in_j = vec![false; n];
    for &v in part_j {
        in_j[v] = true;
    }
    if let Some(&v) = part_i.iter().find(|&&v| in_j[v]) {
        return Err(Error::Precondition(format!("parts overlap at vertex {v}")));
    }
    let mut parent: Vec<Option<Vertex>> = vec![None; n];
    let mut dist = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    let mut sources = part_i.to_vec();
    sources.sort_unstable();
    for &v in &sources {
        dist[v] = 0;
        queue.push_back(v);
    }
    let mut hit = None;
    while let Some(u) = queue.pop_front() {
        if in_j[u] {
            hit = Some(u);
            break;
        }
        for &w in g.neighbors(u) {
            if dist[w] == usize::MAX {
                dist[w] = dist[u] + 1;
                parent[w] = Some(u);
                queue.push_back(w);
            }
        }
    }
    let end = hit.ok_or_else(|| Error::Defect("tree parts not connected".into()))?;
    let distance = dist[end];
    let mut vertices: Vec<Vertex> = part_i.iter().chain(part_j).copied().collect();
    let mut cur = parent[end];
    while let Some(u) = cur {
        if dist[u] == 0 {
            break;
        }
        vertices.push(u);
        cur = parent[u];
    }
    vertices.sort_unstable();
    let sigma = part_i.len() + part_j.len() + distance - 1;
    if vertices.len() != sigma {
        return Err(Error::Defect(format!(
            "bridge has {} vertices but sigma is {sigma}",
            vertices.len()
        )));
    }
    let (graph, vertices) = g.induced(&vertices);
    Ok(Bridge {
        graph,
        vertices,
        distance,
        sigma,
    })
}

/// A star of `k` vertices around a maximum-degree vertex (center first), or
/// else the first `k` vertices of a diameter path, or `None` if neither fits.
pub fn find_star_or_segment(g: &Graph, k: usize) -> Option<Vec<Vertex>> {
    if k == 0 {
        return Some(Vec::new());
    }
    if g.n_vertices() == 0 {
        return None;
    }
    let hub = (0..g.n_vertices())
        .max_by(|&a, &b| g.degree(a).cmp(&g.degree(b)).then(b.cmp(&a)))
        .expect("nonempty graph");
    if g.degree(hub) + 1 >= k {
        let mut star = vec![hub];
        star.extend(g.neighbors(hub).iter().take(k - 1));
        return Some(star);
    }
    let mut best: Option<(usize, Vertex, Vertex)> = None;
    for a in 0..g.n_vertices() {
        for (b, d) in g.bfs_distances(a).into_iter().enumerate() {
            let d = d?;
            if best.map_or(true, |(bd, _, _)| d > bd) {
                best = Some((d, a, b));
            }
        }
    }
    let (diam, a, b) = best?;
    if diam + 1 < k {
        return None;
    }
    // Path from a to b following breadth-first parents from b back to a.
    let mut parent = vec![usize::MAX; g.n_vertices()];
    let mut queue = VecDeque::from([a]);
    parent[a] = a;
    while let Some(u) = queue.pop_front() {
        for &w in g.neighbors(u) {
            if parent[w] == usize::MAX {
                parent[w] = u;
                queue.push_back(w);
            }
        }
    }
    let mut path = vec![b];
    while *path.last().expect("nonempty") != a {
        let last = *path.last().expect("nonempty");
        path.push(parent[last]);
    }
    path.reverse();
    path.truncate(k);
    Some(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{make_line, make_star, random_tree};

    fn triangle() -> Graph {
        Graph::new(3, [(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    #[test]
    fn spanning_tree_of_tree_is_identity() {
        let t = random_tree(12, 3).unwrap();
        assert_eq!(spanning_tree(&t).unwrap(), t);
    }

    #[test]
    fn spanning_tree_of_triangle() {
        // The triangle has three spanning trees; breadth-first from 0 keeps
        // both edges at vertex 0.
        let t = spanning_tree(&triangle()).unwrap();
        assert_eq!(t.edges(), &[(0, 1), (0, 2)]);
        assert_eq!(t.shape(), Some(crate::graphs::Shape::Line { ends: (1, 2) }));
    }

    #[test]
    fn spanning_tree_structural() {
        let g = Graph::new(6, [(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 5), (5, 3), (1, 4)])
            .unwrap();
        let t = spanning_tree(&g).unwrap();
        assert!(t.is_tree());
        assert!(t.edges().iter().all(|e| g.edges().contains(e)));
    }

    #[test]
    fn spanning_tree_disconnected() {
        let g = Graph::new(4, [(0, 1), (2, 3)]).unwrap();
        assert_eq!(spanning_tree(&g), Err(Error::Disconnected { a: 0, b: 2 }));
    }

    #[test]
    fn split_path_four() {
        let s = split_edge_balanced(&make_line(4).unwrap(), 2).unwrap();
        assert_eq!(s.removed_edge, (1, 2));
        assert_eq!(s.side_a, vec![0, 1]);
        assert_eq!(s.side_b, vec![2, 3]);
    }

    #[test]
    fn split_star_five_tie_break() {
        let s = split_edge_balanced(&make_star(5).unwrap(), 4).unwrap();
        assert_eq!(s.removed_edge, (0, 1));
        assert_eq!(s.side_b, vec![1]);
    }

    #[test]
    fn split_path_five() {
        let s = split_edge_balanced(&make_line(5).unwrap(), 2).unwrap();
        let mut sizes = [s.side_a.len(), s.side_b.len()];
        sizes.sort_unstable();
        assert_eq!(sizes, [2, 3]);
        assert_eq!(s.removed_edge, (1, 2));
    }

    #[test]
    fn split_preconditions() {
        let star = make_star(5).unwrap();
        assert!(split_edge_balanced(&star, 3).is_err());
        assert!(split_edge_balanced(&star, 5).is_err());
        assert!(split_edge_balanced(&triangle(), 2).is_err());
    }

    #[test]
    fn centroid_examples() {
        assert_eq!(centroid_vertex(&make_line(5).unwrap()).unwrap(), 2);
        assert_eq!(centroid_vertex(&make_line(4).unwrap()).unwrap(), 1);
        assert_eq!(centroid_vertex(&make_star(9).unwrap()).unwrap(), 0);
        assert_eq!(centroid_vertex(&make_line(1).unwrap()).unwrap(), 0);
        assert!(centroid_vertex(&triangle()).is_err());
    }

    #[test]
    fn iterated_split_examples() {
        let parts = iterated_split(&make_line(8).unwrap(), 2, 2, 2).unwrap();
        assert_eq!(parts, vec![vec![0, 1, 2, 3], vec![4, 5, 6, 7]]);
        let t = random_tree(10, 1).unwrap();
        let whole = iterated_split(&t, 1, 1, t.max_degree()).unwrap();
        assert_eq!(whole, vec![(0..10).collect::<Vec<_>>()]);
        assert_eq!(
            iterated_split(&make_star(8).unwrap(), 3, 2, 7),
            Err(Error::Infeasible { achieved: 1 })
        );
    }

    #[test]
    fn iterated_split_parts_are_subtrees() {
        let t = make_line(64).unwrap();
        let parts = iterated_split(&t, 8, 4, 2).unwrap();
        assert_eq!(parts.len(), 8);
        let mut all: Vec<Vertex> = parts.iter().flatten().copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..64).collect::<Vec<_>>());
        for p in &parts {
            assert!(p.len() >= 4);
            assert!(t.induced(p).0.is_connected());
        }
    }

    #[test]
    fn bridge_formula_cases() {
        let t = make_line(7).unwrap();
        let adj = bridge_subgraph(&t, &[0, 1], &[2, 3, 4]).unwrap();
        assert_eq!((adj.distance, adj.sigma), (1, 5));
        let gap = bridge_subgraph(&t, &[0, 1], &[3, 4]).unwrap();
        assert_eq!((gap.distance, gap.sigma), (2, 5));
        assert_eq!(gap.vertices, vec![0, 1, 2, 3, 4]);
        assert!(gap.graph.is_connected());
        assert!(bridge_subgraph(&t, &[0, 1], &[1, 2]).is_err());
        assert!(bridge_subgraph(&t, &[0, 2], &[4]).is_err());
    }

    #[test]
    fn star_or_segment_examples() {
        let star = make_star(10).unwrap();
        let mut s = find_star_or_segment(&star, 10).unwrap();
        s.sort_unstable();
        assert_eq!(s, (0..10).collect::<Vec<_>>());
        let line = make_line(10).unwrap();
        assert_eq!(find_star_or_segment(&line, 10).unwrap(), (0..10).collect::<Vec<_>>());
        assert_eq!(find_star_or_segment(&line, 11), None);
    }

    #[test]
    fn star_or_segment_absent_on_bushy_tree() {
        // Complete binary-ish tree: max degree 3, diameter far below n.
        let edges: Vec<(usize, usize)> = (1..31).map(|v| ((v - 1) / 2, v)).collect();
        let t = Graph::new(31, edges).unwrap();
        assert_eq!(t.max_degree(), 3);
        assert_eq!(t.diameter(), Some(8));
        assert_eq!(find_star_or_segment(&t, 31), None);
        assert_eq!(find_star_or_segment(&t, 9).map(|p| p.len()), Some(9));
        assert_eq!(find_star_or_segment(&t, 4).map(|p| p.len()), Some(4));
    }
}
