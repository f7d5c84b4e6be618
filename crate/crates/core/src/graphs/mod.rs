//! Finite simple graphs, generators, the edge-list format, and the
//! deterministic tree algorithms (balanced splits, centroids, decompositions).

mod classify;
mod io;
mod tree;

use std::collections::{BinaryHeap, VecDeque};
use std::cmp::Reverse;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use classify::{
    classify_tree, classify_with_thresholds, Band, ClassifyMode, Decomposition, DecompositionKind,
    Thresholds,
};
pub use io::{load_edge_list, save_edge_list};
pub use tree::{
    bridge_subgraph, centroid_vertex, find_star_or_segment, iterated_split, spanning_tree,
    split_edge_balanced, Bridge, TreeSplit,
};

pub type Vertex = usize;

/// An immutable finite simple undirected graph on vertices `0..n`.
///
/// Edges are stored once with `u < v`, sorted lexicographically; the index
/// of an edge in that order is its edge id. Adjacency lists are ascending.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphRepr", into = "GraphRepr")]
pub struct Graph {
    n: usize,
    edges: Vec<(Vertex, Vertex)>,
    adjacency: Vec<Vec<Vertex>>,
}

#[derive(Serialize, Deserialize)]
struct GraphRepr {
    n_vertices: usize,
    edges: Vec<(Vertex, Vertex)>,
}

impl TryFrom<GraphRepr> for Graph {
    type Error = Error;

    fn try_from(repr: GraphRepr) -> Result<Self> {
        Graph::new(repr.n_vertices, repr.edges)
    }
}

impl From<Graph> for GraphRepr {
    fn from(g: Graph) -> Self {
        GraphRepr {
            n_vertices: g.n,
            edges: g.edges,
        }
    }
}

/// Recognised special shapes, used where an operation only makes sense on
/// line segments or stars.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shape {
    /// Path graph; carries the two endpoints (equal for a single vertex).
    Line { ends: (Vertex, Vertex) },
    /// Star graph with the given center.
    Star { center: Vertex },
}

impl Graph {
    /// Builds a graph, rejecting self-loops, parallel edges and
    /// out-of-range endpoints.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (Vertex, Vertex)>) -> Result<Self> {
        let mut canon: Vec<(Vertex, Vertex)> = Vec::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge {{{u}, {v}}} has an endpoint outside 0..{n}"
                )));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {u}")));
            }
            canon.push((u.min(v), u.max(v)));
        }
        canon.sort_unstable();
        if let Some(w) = canon.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidGraph(format!(
                "duplicate edge {{{}, {}}}",
                w[0].0, w[0].1
            )));
        }
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in &canon {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(Graph {
            n,
            edges: canon,
            adjacency,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(Vertex, Vertex)] {
        &self.edges
    }

    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.adjacency[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Id of the edge `{u, v}` in canonical order.
    pub fn edge_id(&self, u: Vertex, v: Vertex) -> Option<usize> {
        let key = (u.min(v), u.max(v));
        self.edges.binary_search(&key).ok()
    }

    /// Breadth-first distances from `source`; `None` for unreachable vertices.
    pub fn bfs_distances(&self, source: Vertex) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n];
        let mut queue = VecDeque::new();
        dist[source] = Some(0);
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap_or(0);
            for &w in &self.adjacency[u] {
                if dist[w].is_none() {
                    dist[w] = Some(du + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Connected components, each sorted, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<Vertex>> {
        let mut seen = vec![false; self.n];
        let mut out = Vec::new();
        for s in 0..self.n {
            if seen[s] {
                continue;
            }
            let mut comp = vec![s];
            seen[s] = true;
            let mut i = 0;
            while i < comp.len() {
                let u = comp[i];
                i += 1;
                for &w in &self.adjacency[u] {
                    if !seen[w] {
                        seen[w] = true;
                        comp.push(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.n > 0 && self.components().len() == 1
    }

    pub fn is_tree(&self) -> bool {
        self.n >= 1 && self.edges.len() == self.n - 1 && self.is_connected()
    }

    /// Graph diameter (longest shortest path), `None` if disconnected.
    pub fn diameter(&self) -> Option<usize> {
        let mut best = 0;
        for s in 0..self.n {
            for d in self.bfs_distances(s) {
                best = best.max(d?);
            }
        }
        Some(best)
    }

    /// Subgraph induced on `vertices`, relabeled to `0..k` in ascending order
    /// of the original ids. Returns the subgraph and the local-to-global map.
    pub fn induced(&self, vertices: &[Vertex]) -> (Graph, Vec<Vertex>) {
        let mut global: Vec<Vertex> = vertices.to_vec();
        global.sort_unstable();
        global.dedup();
        let mut local = vec![usize::MAX; self.n];
        for (i, &v) in global.iter().enumerate() {
            local[v] = i;
        }
        let edges = self
            .edges
            .iter()
            .filter(|&&(u, v)| local[u] != usize::MAX && local[v] != usize::MAX)
            .map(|&(u, v)| (local[u], local[v]));
        let g = Graph::new(global.len(), edges).expect("induced subgraph of a simple graph");
        (g, global)
    }

    /// Detects whether the graph is a path or a star. Two-vertex graphs are
    /// reported as lines.
    pub fn shape(&self) -> Option<Shape> {
        if !self.is_tree() {
            return None;
        }
        if self.n == 1 {
            return Some(Shape::Line { ends: (0, 0) });
        }
        if self.max_degree() <= 2 {
            let mut ends = (0..self.n).filter(|&v| self.degree(v) == 1);
            let a = ends.next()?;
            let b = ends.next()?;
            return Some(Shape::Line { ends: (a, b) });
        }
        let center = (0..self.n).find(|&v| self.degree(v) == self.n - 1)?;
        Some(Shape::Star { center })
    }
}

/// Path graph on `n` vertices with edges `{i, i+1}`.
pub fn make_line(n: usize) -> Result<Graph> {
    if n == 0 {
        return Err(Error::InvalidSize {
            what: "line",
            got: n,
        });
    }
    Graph::new(n, (1..n).map(|i| (i - 1, i)))
}

/// Star on `n` vertices with center 0.
pub fn make_star(n: usize) -> Result<Graph> {
    if n < 2 {
        return Err(Error::InvalidSize {
            what: "star",
            got: n,
        });
    }
    Graph::new(n, (1..n).map(|i| (0, i)))
}

/// Uniformly random labeled tree on `n` vertices from a seeded Prüfer sequence.
pub fn random_tree(n: usize, seed: u64) -> Result<Graph> {
    if n == 0 {
        return Err(Error::InvalidSize {
            what: "random tree",
            got: n,
        });
    }
    if n <= 2 {
        return make_line(n);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let code: Vec<Vertex> = (0..n - 2).map(|_| rng.random_range(0..n)).collect();
    prufer_decode(&code, n)
}

/// Decodes a Prüfer sequence of length `n - 2` over `0..n` into its tree.
pub fn prufer_decode(code: &[Vertex], n: usize) -> Result<Graph> {
    if n < 2 || code.len() != n - 2 {
        return Err(Error::Precondition(format!(
            "Prüfer code of length {} does not describe a tree on {n} vertices",
            code.len()
        )));
    }
    if let Some(&bad) = code.iter().find(|&&v| v >= n) {
        return Err(Error::Precondition(format!(
            "Prüfer entry {bad} out of range 0..{n}"
        )));
    }
    let mut degree = vec![1usize; n];
    for &v in code {
        degree[v] += 1;
    }
    let mut leaves: BinaryHeap<Reverse<Vertex>> =
        (0..n).filter(|&v| degree[v] == 1).map(Reverse).collect();
    let mut edges = Vec::with_capacity(n - 1);
    for &v in code {
        let Reverse(leaf) = leaves.pop().expect("a tree always has a leaf");
        edges.push((leaf, v));
        degree[v] -= 1;
        if degree[v] == 1 {
            leaves.push(Reverse(v));
        }
    }
    let Reverse(a) = leaves.pop().expect("two leaves remain");
    let Reverse(b) = leaves.pop().expect("two leaves remain");
    edges.push((a, b));
    Graph::new(n, edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_three() {
        let g = make_line(3).unwrap();
        assert_eq!(g.n_vertices(), 3);
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
    }

    #[test]
    fn line_single_vertex() {
        let g = make_line(1).unwrap();
        assert_eq!(g.n_vertices(), 1);
        assert_eq!(g.n_edges(), 0);
        assert!(g.is_tree());
    }

    #[test]
    fn line_five_diameter_and_degree() {
        let g = make_line(5).unwrap();
        assert_eq!(g.diameter(), Some(4));
        assert_eq!(g.max_degree(), 2);
    }

    #[test]
    fn line_zero_rejected() {
        assert!(matches!(make_line(0), Err(Error::InvalidSize { .. })));
    }

    #[test]
    fn star_four() {
        let g = make_star(4).unwrap();
        assert_eq!(g.degree(0), 3);
        assert!((1..4).all(|v| g.degree(v) == 1));
    }

    #[test]
    fn star_two_is_line_two() {
        assert_eq!(make_star(2).unwrap(), make_line(2).unwrap());
    }

    #[test]
    fn star_ten_diameter() {
        assert_eq!(make_star(10).unwrap().diameter(), Some(2));
    }

    #[test]
    fn star_too_small() {
        assert!(make_star(1).is_err());
        assert!(make_star(0).is_err());
    }

    #[test]
    fn random_tree_single_vertex() {
        let g = random_tree(1, 9).unwrap();
        assert_eq!(g.n_vertices(), 1);
        assert_eq!(g.n_edges(), 0);
    }

    #[test]
    fn random_tree_is_tree_and_deterministic() {
        for n in 1..40 {
            for seed in 0..5 {
                let g = random_tree(n, seed).unwrap();
                assert_eq!(g.n_edges(), n - 1);
                assert!(g.is_connected());
                assert_eq!(g, random_tree(n, seed).unwrap());
            }
        }
    }

    #[test]
    fn rejects_self_loops_and_duplicates() {
        assert!(Graph::new(3, [(1, 1)]).is_err());
        assert!(Graph::new(3, [(0, 1), (1, 0)]).is_err());
        assert!(Graph::new(3, [(0, 3)]).is_err());
    }

    #[test]
    fn prufer_known_code() {
        // Code [3, 3, 3] on 5 vertices is the star centered at 3 plus edge {3, 4}.
        let g = prufer_decode(&[3, 3, 3], 5).unwrap();
        assert_eq!(g.edges(), &[(0, 3), (1, 3), (2, 3), (3, 4)]);
    }

    #[test]
    fn shapes() {
        assert_eq!(
            make_line(4).unwrap().shape(),
            Some(Shape::Line { ends: (0, 3) })
        );
        assert_eq!(make_star(5).unwrap().shape(), Some(Shape::Star { center: 0 }));
        let y = Graph::new(5, [(0, 1), (1, 2), (1, 3), (3, 4)]).unwrap();
        assert_eq!(y.shape(), None);
    }

    #[test]
    fn induced_relabels() {
        let g = make_line(6).unwrap();
        let (sub, map) = g.induced(&[5, 3, 4]);
        assert_eq!(map, vec![3, 4, 5]);
        assert_eq!(sub.edges(), &[(0, 1), (1, 2)]);
    }
}
