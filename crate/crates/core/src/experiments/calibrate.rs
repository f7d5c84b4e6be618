use serde::{Deserialize, Serialize};

use super::estimate_mean_extinction;
use crate::constants::{Constants, Provenance};
use crate::error::{Error, Result};
use crate::graphs::{make_line, make_star, Graph};
use crate::harris::Configuration;
use crate::process::{right_edge_trace, run_coupled, survives};
use crate::replicas::{map_replicas, replica_seed};
use crate::report::{wilson_interval, SampleStats, Z95};

/// Candidate constants, tried from largest to smallest.
const GRID: [f64; 12] = [0.5, 0.4, 0.3, 0.25, 0.2, 0.15, 0.1, 0.07, 0.05, 0.03, 0.02, 0.01];
/// Vertex counts probed for both families.
const PROBE_SIZES: [usize; 3] = [6, 10, 14];
const PROBE_REPLICAS: usize = 100;
/// Mean-extinction probes are censored at this multiple of the target.
const CAP_FACTOR: f64 = 8.0;

/// One estimate made while calibrating.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub family: String,
    pub size: usize,
    pub c: f64,
    pub quantity: String,
    pub estimate: f64,
    /// The confidence limit compared with the target.
    pub limit: f64,
    pub target: f64,
    pub passed: bool,
    pub replicas: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub constants: Constants,
    pub probes: Vec<Probe>,
    pub replicas_used: usize,
    pub warnings: Vec<String>,
}

struct Budget {
    limit: usize,
    used: usize,
    probes: Vec<Probe>,
    base_seed: u64,
}

impl Budget {
    fn take(&mut self, replicas: usize) -> Option<u64> {
        if self.used + replicas > self.limit {
            return None;
        }
        self.used += replicas;
        Some(replica_seed(self.base_seed, self.probes.len() as u64))
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Kind {
    Line,
    Star,
}

impl Kind {
    fn name(self) -> &'static str {
        match self {
            Kind::Line => "line",
            Kind::Star => "star",
        }
    }

    fn graph(self, n: usize) -> Result<Graph> {
        match self {
            Kind::Line => make_line(n),
            Kind::Star => make_star(n),
        }
    }
}

/// `P[some singleton process is alive and differs from the full one at t]`.
fn decoupled_somewhere(g: &Graph, lambda: f64, t: f64, seed: u64) -> Result<bool> {
    let n = g.n_vertices();
    let mut starts = Vec::with_capacity(n + 1);
    for x in 0..n {
        starts.push(Configuration::from_vertices(n, [x])?);
    }
    starts.push(Configuration::full(n));
    let run = run_coupled(g, lambda, &starts, &[t], seed)?;
    let full = &run.snapshots[n][0];
    Ok(run.snapshots[..n]
        .iter()
        .any(|s| !s[0].is_empty() && &s[0] != full))
}

/// Outcome of one probe: `None` when the budget ran out first.
type Step = Option<bool>;

fn proportion_probe(
    budget: &mut Budget,
    kind: Kind,
    size: usize,
    c: f64,
    quantity: &str,
    target: f64,
    above: bool,
    trial: impl Fn(u64) -> Result<bool> + Sync + Send,
) -> Result<Step> {
    let Some(seed) = budget.take(PROBE_REPLICAS) else {
        return Ok(None);
    };
    let hits = map_replicas(PROBE_REPLICAS, seed, |_, s| trial(s))
        .into_iter()
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .filter(|&b| b)
        .count();
    let (lo, hi) = wilson_interval(hits, PROBE_REPLICAS, Z95);
    let (limit, passed) = if above { (lo, lo > target) } else { (hi, hi < target) };
    budget.probes.push(Probe {
        family: kind.name().into(),
        size,
        c,
        quantity: quantity.into(),
        estimate: hits as f64 / PROBE_REPLICAS as f64,
        limit,
        target,
        passed,
        replicas: PROBE_REPLICAS,
        seed,
    });
    Ok(Some(passed))
}

fn mean_probe(budget: &mut Budget, kind: Kind, g: &Graph, lambda: f64, c: f64) -> Result<Step> {
    let Some(seed) = budget.take(PROBE_REPLICAS) else {
        return Ok(None);
    };
    let n = g.n_vertices();
    let target = (c * n as f64).exp();
    let cap = CAP_FACTOR * target;
    // Censored runs enter at the cap, so the mean is a lower bound.
    let values: Vec<f64> = estimate_mean_extinction(g, lambda, PROBE_REPLICAS, cap, seed)?
        .samples
        .iter()
        .map(|s| s.value.unwrap_or(cap))
        .collect();
    let stats = SampleStats::from_values(&values).expect("replicas > 0");
    let limit = stats.mean - Z95 * stats.se;
    budget.probes.push(Probe {
        family: kind.name().into(),
        size: n,
        c,
        quantity: "mean_extinction_time".into(),
        estimate: stats.mean,
        limit,
        target,
        passed: limit >= target,
        replicas: PROBE_REPLICAS,
        seed,
    });
    Ok(Some(limit >= target))
}

/// Runs every probe of one family at one candidate `c`, stopping at the
/// first failure.
fn family_holds(budget: &mut Budget, kind: Kind, lambda: f64, c: f64) -> Result<Step> {
    for size in PROBE_SIZES {
        let g = kind.graph(size)?;
        let n = size as f64;
        let decay = (-c * n).exp();
        let steps: Vec<Step> = match kind {
            Kind::Line => {
                let t = n / c;
                let cross = proportion_probe(budget, kind, size, c, "crossing_probability", c, true, |s| {
                    Ok(right_edge_trace(size, lambda, s, t)?.crossing_time.is_some())
                })?;
                if cross != Some(true) {
                    return Ok(cross);
                }
                vec![proportion_probe(budget, kind, size, c, "decoupling_probability", decay, false, |s| {
                    decoupled_somewhere(&g, lambda, t, s)
                })?]
            }
            Kind::Star => {
                let mut out = Vec::new();
                for (quantity, x) in [("center_survival", 0), ("leaf_survival", 1)] {
                    let start = Configuration::from_vertices(size, [x])?;
                    out.push(proportion_probe(budget, kind, size, c, quantity, c, true, |s| {
                        survives(&g, lambda, &start, n, s)
                    })?);
                    if out.last() != Some(&Some(true)) {
                        return Ok(*out.last().expect("pushed"));
                    }
                }
                out.push(proportion_probe(budget, kind, size, c, "decoupling_probability", decay, false, |s| {
                    decoupled_somewhere(&g, lambda, n, s)
                })?);
                out
            }
        };
        if let Some(step) = steps.into_iter().find(|s| *s != Some(true)) {
            return Ok(step);
        }
        let mean = mean_probe(budget, kind, &g, lambda, c)?;
        if mean != Some(true) {
            return Ok(mean);
        }
    }
    Ok(Some(true))
}

/// Largest grid value of `c_line` and of `c_star` whose empirical line and
/// star estimates hold with 95% confidence at every probed size, spending at
/// most `budget` replicas. The other constants keep their defaults. When
/// either family has no feasible value the defaults are returned with a
/// warning.
pub fn calibrate_constants(lambda: f64, budget: usize, base_seed: u64) -> Result<Calibration> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Parameter(format!("infection rate must be positive, got {lambda}")));
    }
    let defaults = Constants::default();
    let mut b = Budget {
        limit: budget,
        used: 0,
        probes: Vec::new(),
        base_seed,
    };
    let mut warnings = Vec::new();
    let mut found = [None, None];
    for (slot, kind) in [Kind::Line, Kind::Star].into_iter().enumerate() {
        for c in GRID {
            match family_holds(&mut b, kind, lambda, c)? {
                Some(true) => {
                    found[slot] = Some(c);
                    break;
                }
                Some(false) => {}
                None => {
                    warnings.push(format!("budget exhausted while probing the {} family", kind.name()));
                    break;
                }
            }
        }
        if found[slot].is_none() && !warnings.iter().any(|w| w.contains(kind.name())) {
            warnings.push(format!("no candidate passed for the {} family", kind.name()));
        }
    }
    let constants = match found {
        [Some(line), Some(star)] => Constants::derived(
            line,
            star,
            defaults.c_coup,
            defaults.c_split,
            defaults.c_eps,
            Provenance::Calibrated,
        ),
        _ => {
            warnings.push("falling back to default constants".into());
            defaults
        }
    };
    Ok(Calibration {
        constants,
        replicas_used: b.used,
        probes: b.probes,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_budget_falls_back_to_defaults() {
        let cal = calibrate_constants(2.0, 50, 0).unwrap();
        assert_eq!(cal.constants, Constants::default());
        assert!(cal.warnings.iter().any(|w| w.contains("budget exhausted")));
        assert_eq!(cal.replicas_used, 0);
    }

    #[test]
    fn decoupling_indicator_on_full_coupling() {
        // A single vertex cannot differ from the full process.
        let g = make_line(1).unwrap();
        for s in 0..20 {
            assert!(!decoupled_somewhere(&g, 2.0, 0.5, s).unwrap());
        }
    }
}
