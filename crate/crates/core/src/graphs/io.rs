//! Plain-text edge lists: one `u v` pair per line, `#` comments, blank lines
//! ignored. The canonical form written by [`save_edge_list`] starts with a
//! `# vertices: N` directive so isolated trailing vertices survive a round
//! trip; readers that treat it as a plain comment lose nothing else.

use std::collections::HashSet;

use super::{Graph, Vertex};
use crate::error::{Error, Result};

const VERTICES_DIRECTIVE: &str = "vertices:";

pub fn load_edge_list(text: &str) -> Result<Graph> {
    let mut declared: Option<usize> = None;
    let mut edges: Vec<(Vertex, Vertex)> = Vec::new();
    let mut seen: HashSet<(Vertex, Vertex)> = HashSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(count) = comment.trim().strip_prefix(VERTICES_DIRECTIVE) {
                let n = count.trim().parse::<usize>().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("bad vertex count {:?}", count.trim()),
                })?;
                declared = Some(n);
            }
            continue;
        }
        let mut tokens = line.split_whitespace();
        let mut next_id = |what: &str| -> Result<Vertex> {
            let tok = tokens.next().ok_or_else(|| Error::Parse {
                line: line_no,
                message: format!("missing {what} endpoint"),
            })?;
            tok.parse::<Vertex>().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("non-integer token {tok:?}"),
            })
        };
        let u = next_id("first")?;
        let v = next_id("second")?;
        if let Some(extra) = tokens.next() {
            return Err(Error::Parse {
                line: line_no,
                message: format!("unexpected trailing token {extra:?}"),
            });
        }
        if u == v {
            return Err(Error::Parse {
                line: line_no,
                message: format!("self-loop at vertex {u}"),
            });
        }
        let key = (u.min(v), u.max(v));
        if !seen.insert(key) {
            return Err(Error::Parse {
                line: line_no,
                message: format!("duplicate edge {{{}, {}}}", key.0, key.1),
            });
        }
        edges.push(key);
    }
    let implied = edges.iter().map(|&(_, v)| v + 1).max().unwrap_or(0);
    let n = match declared {
        Some(n) if n < implied => {
            return Err(Error::Parse {
                line: 0,
                message: format!("declared {n} vertices but edges use id {}", implied - 1),
            })
        }
        Some(n) => n,
        None => implied,
    };
    Graph::new(n, edges)
}

pub fn save_edge_list(g: &Graph) -> String {
    let mut out = format!("# {VERTICES_DIRECTIVE} {}\n", g.n_vertices());
    for &(u, v) in g.edges() {
        out.push_str(&format!("{u} {v}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{make_line, random_tree};
    use proptest::prelude::*;

    #[test]
    fn loads_a_line() {
        assert_eq!(load_edge_list("0 1\n1 2").unwrap(), make_line(3).unwrap());
    }

    #[test]
    fn duplicate_edge_names_line_two() {
        let err = load_edge_list("0 1\n0 1").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err:?}");
        let err = load_edge_list("0 1\n1 0").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err:?}");
    }

    #[test]
    fn self_loop_and_garbage_rejected() {
        assert!(matches!(
            load_edge_list("# hi\n\n3 3").unwrap_err(),
            Error::Parse { line: 3, .. }
        ));
        assert!(matches!(
            load_edge_list("0 x").unwrap_err(),
            Error::Parse { line: 1, .. }
        ));
        assert!(matches!(
            load_edge_list("0 1 2").unwrap_err(),
            Error::Parse { line: 1, .. }
        ));
        assert!(matches!(
            load_edge_list("-1 2").unwrap_err(),
            Error::Parse { line: 1, .. }
        ));
    }

    #[test]
    fn comments_and_blanks_ignored() {
        let g = load_edge_list("# a path\n\n 1 2 \n0 1 # not a comment").unwrap_err();
        assert!(matches!(g, Error::Parse { line: 4, .. }));
        let g = load_edge_list("# a path\n\n 1 2 \n0 1\n").unwrap();
        assert_eq!(g, make_line(3).unwrap());
    }

    #[test]
    fn single_vertex_round_trips() {
        let g = make_line(1).unwrap();
        assert_eq!(load_edge_list(&save_edge_list(&g)).unwrap(), g);
    }

    proptest! {
        #[test]
        fn save_load_is_canonical(n in 1usize..30, seed in any::<u64>(), rot in 0usize..30) {
            let g = random_tree(n, seed).unwrap();
            // Scramble orientation and order, then canonicalize.
            let mut lines: Vec<String> = g.edges().iter().enumerate()
                .map(|(i, &(u, v))| if i % 2 == 0 { format!("{v} {u}") } else { format!("{u} {v}") })
                .collect();
            if !lines.is_empty() {
                let k = rot % lines.len();
                lines.rotate_left(k);
            }
            let text = format!("# vertices: {n}\n{}", lines.join("\n"));
            let loaded = load_edge_list(&text).unwrap();
            prop_assert_eq!(&loaded, &g);
            let canonical = save_edge_list(&loaded);
            prop_assert_eq!(save_edge_list(&load_edge_list(&canonical).unwrap()), canonical);
        }
    }
}
