//! Three-way structural classification of trees: a high-degree vertex, many
//! medium subtrees hanging off the centroid, or a decomposition into few
//! pieces of at most half the size.

use serde::Serialize;

use super::tree::{centroid_vertex, components_around};
use super::{Graph, Vertex};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifyMode {
    /// Exponent 10 family: degree threshold `n / (ln n)^10`.
    Level3,
    /// Exponent `1 + eps` family with three medium bands.
    Level4,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DecompositionKind {
    HighDegreeVertex,
    ManyMediumSubtrees,
    FewPieces,
}

/// A size band of centroid subtrees `[lower, upper)` together with the mass
/// that triggers it and the count it then guarantees.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Band {
    /// Band index `k` (level 4), or 0 for the single level-3 band.
    pub level: u8,
    pub lower: f64,
    pub upper: f64,
    pub trigger_mass: f64,
    pub min_count: f64,
}

/// Every numeric threshold the classification uses for one tree size.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Thresholds {
    pub n: usize,
    pub high_degree: f64,
    /// Lower size bound for the "large" subtrees.
    pub large: f64,
    pub large_trigger_mass: f64,
    /// Upper bound on the number of pieces in a few-pieces decomposition.
    pub max_pieces: f64,
    pub bands: Vec<Band>,
    /// Whether the mass triggers are strict (`>`) or not (`>=`).
    pub strict: bool,
}

impl Thresholds {
    /// Thresholds for a tree of `n` vertices (natural logarithms throughout).
    pub fn for_mode(n: usize, mode: ClassifyMode, a_const: f64, eps: f64) -> Self {
        let nf = n as f64;
        let log = nf.ln();
        match mode {
            ClassifyMode::Level3 => {
                let big = a_const * log.powi(13);
                Thresholds {
                    n,
                    high_degree: nf / log.powi(10),
                    large: big,
                    large_trigger_mass: nf / 2.0,
                    max_pieces: nf / big + 1.0,
                    bands: vec![Band {
                        level: 0,
                        lower: log.powi(10) / 4.0,
                        upper: big,
                        trigger_mass: nf / 4.0,
                        min_count: nf / (4.0 * big),
                    }],
                    strict: true,
                }
            }
            ClassifyMode::Level4 => {
                let p = |k: f64| log.powf(k + eps);
                let big = a_const * p(4.0);
                let bands = vec![
                    Band {
                        level: 1,
                        lower: p(1.0) / 4.0,
                        upper: p(2.0),
                        trigger_mass: nf / 12.0,
                        min_count: nf / (12.0 * p(2.0)),
                    },
                    Band {
                        level: 2,
                        lower: p(2.0),
                        upper: p(3.0),
                        trigger_mass: nf / 12.0,
                        min_count: nf / (12.0 * p(3.0)),
                    },
                    Band {
                        level: 3,
                        lower: p(3.0),
                        upper: big,
                        trigger_mass: nf / 12.0,
                        min_count: nf / (12.0 * big),
                    },
                ];
                Thresholds {
                    n,
                    high_degree: nf / p(1.0),
                    large: big,
                    large_trigger_mass: nf / 2.0,
                    max_pieces: (nf / big + 1.0).min(2.0 * nf / big),
                    bands,
                    strict: false,
                }
            }
        }
    }

    fn triggered(&self, mass: usize, trigger: f64) -> bool {
        if self.strict {
            mass as f64 > trigger
        } else {
            mass as f64 >= trigger
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Decomposition {
    pub kind: DecompositionKind,
    /// Disjoint connected parts, each sorted.
    pub parts: Vec<Vec<Vertex>>,
    /// The high-degree vertex or the centroid.
    pub witness: Option<Vertex>,
    /// Band index for medium subtrees in level-4 mode.
    pub level_k: Option<u8>,
    /// Which inequality branch produced the result.
    pub branch: String,
    pub thresholds: Thresholds,
}

/// Classifies a tree with `n >= 2` vertices following the constructive case
/// analysis around a centroid.
pub fn classify_tree(
    t: &Graph,
    a_const: f64,
    exponent_eps: f64,
    mode: ClassifyMode,
) -> Result<Decomposition> {
    if !(a_const > 0.0) || !(exponent_eps > 0.0) {
        return Err(Error::Parameter("A and eps must be positive".into()));
    }
    let th = Thresholds::for_mode(t.n_vertices(), mode, a_const, exponent_eps);
    classify_with_thresholds(t, &th)
}

/// Same as [`classify_tree`] with explicit thresholds.
pub fn classify_with_thresholds(t: &Graph, th: &Thresholds) -> Result<Decomposition> {
    if !t.is_tree() || t.n_vertices() < 2 {
        return Err(Error::Precondition(
            "classification needs a tree with at least 2 vertices".into(),
        ));
    }
    let n = t.n_vertices();
    let mut out = Decomposition {
        kind: DecompositionKind::HighDegreeVertex,
        parts: Vec::new(),
        witness: None,
        level_k: None,
        branch: String::new(),
        thresholds: th.clone(),
    };

    let hub = (0..n)
        .max_by(|&a, &b| t.degree(a).cmp(&t.degree(b)).then(b.cmp(&a)))
        .expect("nonempty");
    if t.degree(hub) as f64 >= th.high_degree {
        let mut star = vec![hub];
        star.extend_from_slice(t.neighbors(hub));
        star.sort_unstable();
        out.parts = vec![star];
        out.witness = Some(hub);
        out.branch = "high-degree".into();
        return Ok(out);
    }

    let x = centroid_vertex(t)?;
    let subtrees = components_around(t, x);
    let size = |i: &usize| subtrees[*i].len();
    let large: Vec<usize> = (0..subtrees.len())
        .filter(|i| size(i) as f64 >= th.large)
        .collect();
    let large_mass: usize = large.iter().map(size).sum();
    let band_members: Vec<Vec<usize>> = th
        .bands
        .iter()
        .map(|b| {
            (0..subtrees.len())
                .filter(|i| {
                    let s = size(i) as f64;
                    s >= b.lower && s < b.upper
                })
                .collect()
        })
        .collect();

    let few_pieces = |out: &mut Decomposition, branch: &str| -> Result<()> {
        let mut parts: Vec<Vec<Vertex>> = large.iter().map(|&i| subtrees[i].clone()).collect();
        let mut rest = vec![x];
        for (i, s) in subtrees.iter().enumerate() {
            if !large.contains(&i) {
                rest.extend_from_slice(s);
            }
        }
        rest.sort_unstable();
        parts.push(rest);
        let oversized = parts.iter().any(|p| 2 * p.len() > n);
        if oversized || parts.len() as f64 > th.max_pieces {
            return Err(Error::Defect(format!(
                "few-pieces construction ({branch}) violates its bounds: sizes {:?}, limit {}",
                parts.iter().map(Vec::len).collect::<Vec<_>>(),
                th.max_pieces
            )));
        }
        parts.sort_by_key(|p| p[0]);
        out.kind = DecompositionKind::FewPieces;
        out.parts = parts;
        out.witness = Some(x);
        out.branch = branch.into();
        Ok(())
    };

    let medium = |out: &mut Decomposition, band: &Band, members: &[usize]| -> Result<()> {
        if (members.len() as f64) < band.min_count {
            return Err(Error::Defect(format!(
                "band {} holds {} subtrees, fewer than the guaranteed {}",
                band.level,
                members.len(),
                band.min_count
            )));
        }
        out.kind = DecompositionKind::ManyMediumSubtrees;
        out.parts = members.iter().map(|&i| subtrees[i].clone()).collect();
        out.witness = Some(x);
        Ok(())
    };

    if th.strict {
        // Single medium band checked first, then the large subtrees.
        let band = &th.bands[0];
        let mass: usize = band_members[0].iter().map(size).sum();
        if th.triggered(mass, band.trigger_mass) {
            medium(&mut out, band, &band_members[0])?;
            out.branch = "hypJ".into();
            return Ok(out);
        }
        if th.triggered(large_mass, th.large_trigger_mass) {
            few_pieces(&mut out, "hypI")?;
            return Ok(out);
        }
    } else {
        if th.triggered(large_mass, th.large_trigger_mass) {
            few_pieces(&mut out, "case (i)")?;
            return Ok(out);
        }
        let labels = ["case (ii)", "case (iii)", "case (iv)"];
        for (bi, band) in th.bands.iter().enumerate() {
            let mass: usize = band_members[bi].iter().map(size).sum();
            if th.triggered(mass, band.trigger_mass) {
                medium(&mut out, band, &band_members[bi])?;
                out.level_k = Some(band.level);
                out.branch = labels.get(bi).copied().unwrap_or("band").into();
                return Ok(out);
            }
        }
    }
    // Neither mass trigger fired; the few-pieces construction may still be
    // valid when the large subtrees hold exactly half the vertices.
    few_pieces(&mut out, "boundary")?;
    Ok(out)
}
