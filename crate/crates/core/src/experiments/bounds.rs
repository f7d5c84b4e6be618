use serde::{Deserialize, Serialize};

use super::estimate_mean_extinction;
use crate::error::{Error, Result};
use crate::graphs::{Graph, Vertex};
use crate::harris::Configuration;
use crate::oracle::{exact_cdf_extinction, exact_expected_extinction, MAX_TRANSIENT_VERTICES};
use crate::process::{extinction_time, survival_probability};
use crate::replicas::map_replicas;

/// Graphs up to this size get exact means in the product bound.
const EXACT_MEAN_LIMIT: usize = 12;
const CDF_TOLERANCE: f64 = 1e-10;
/// Slack granted to exact-versus-exact comparisons.
const EXACT_SLACK: f64 = 1e-8;
/// Standard errors a Monte Carlo estimate may sit past the bound before the
/// violation is called real.
const NOISE_SE: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Holds,
    ViolatedWithinNoise,
    Violated,
}

/// Comparison `lhs relation rhs` with a tolerance and the uncertainty of the
/// left side.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub name: String,
    pub lhs: f64,
    /// `None` when the left side is exact.
    pub lhs_se: Option<f64>,
    pub rhs: f64,
    pub margin: f64,
    pub relation: Relation,
    pub verdict: Verdict,
    /// Both sides are natural logarithms of the quantities named.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub log_scale: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl BoundCheck {
    pub fn new(name: &str, lhs: f64, lhs_se: Option<f64>, relation: Relation, rhs: f64, margin: f64) -> Self {
        // Signed excess of lhs over what the bound allows.
        let excess = match relation {
            Relation::AtMost => lhs - rhs - margin,
            Relation::AtLeast => rhs - lhs - margin,
        };
        let se = lhs_se.unwrap_or(0.0);
        let verdict = if excess <= 0.0 {
            Verdict::Holds
        } else if excess <= NOISE_SE * se {
            Verdict::ViolatedWithinNoise
        } else {
            Verdict::Violated
        };
        BoundCheck {
            name: name.to_string(),
            lhs,
            lhs_se,
            rhs,
            margin,
            relation,
            verdict,
            log_scale: false,
            note: None,
        }
    }

    fn in_logs(mut self) -> Self {
        self.log_scale = true;
        self
    }

    fn noted(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

/// Checks `P[τ ≤ t] ≤ t / E[τ]` on the grid. Exact on both sides for graphs
/// within the transient oracle's range, Monte Carlo otherwise.
pub fn check_attract_bound(
    g: &Graph,
    lambda: f64,
    t_grid: &[f64],
    replicas: usize,
    base_seed: u64,
) -> Result<Vec<BoundCheck>> {
    if g.n_vertices() > MAX_TRANSIENT_VERTICES {
        return check_attract_bound_mc(g, lambda, t_grid, replicas, base_seed, 1e6);
    }
    let mean = exact_expected_extinction(g, lambda)?;
    let cdf = exact_cdf_extinction(g, lambda, t_grid, CDF_TOLERANCE)?;
    Ok(t_grid
        .iter()
        .zip(cdf)
        .map(|(&t, p)| {
            BoundCheck::new(&format!("P[tau <= {t}] <= t/E[tau]"), p, None, Relation::AtMost, t / mean, EXACT_SLACK)
                .noted("exact")
        })
        .collect())
}

/// Monte Carlo version: the empirical CDF of `τ` from `replicas` runs
/// against `t / E[τ]`, with `E[τ]` exact when the oracle allows and a
/// separate estimate capped at `time_cap` otherwise.
pub fn check_attract_bound_mc(
    g: &Graph,
    lambda: f64,
    t_grid: &[f64],
    replicas: usize,
    base_seed: u64,
    time_cap: f64,
) -> Result<Vec<BoundCheck>> {
    if replicas == 0 {
        return Err(Error::Parameter("need at least one replica".into()));
    }
    let t_max = t_grid.iter().copied().fold(0.0, f64::max);
    let (mean, mean_note) = match exact_expected_extinction(g, lambda) {
        Ok(m) => (m, "exact mean".to_string()),
        Err(Error::Capacity { .. }) => {
            let est = estimate_mean_extinction(g, lambda, replicas.max(2), time_cap, base_seed ^ 0x9e37_79b9)?;
            let m = est.report.estimate.ok_or_else(|| {
                Error::Precondition("every mean-estimation replica was censored".into())
            })?;
            let note = if est.report.censored > 0 {
                format!("estimated mean, {} censored (biased low)", est.report.censored)
            } else {
                "estimated mean".to_string()
            };
            (m, note)
        }
        Err(e) => return Err(e),
    };
    let cap = if t_max > 0.0 { t_max } else { 1.0 };
    let taus = map_replicas(replicas, base_seed, |_, seed| extinction_time(g, lambda, seed, cap));
    let taus = taus.into_iter().collect::<Result<Vec<_>>>()?;
    let r = replicas as f64;
    Ok(t_grid
        .iter()
        .map(|&t| {
            let hits = taus.iter().filter(|x| matches!(x, Some(v) if *v <= t)).count() as f64;
            let p = hits / r;
            let se = (p * (1.0 - p) / r).sqrt();
            BoundCheck::new(&format!("P[tau <= {t}] <= t/E[tau]"), p, Some(se), Relation::AtMost, t / mean, 0.0)
                .noted(mean_note.clone())
        })
        .collect())
}

struct MeanValue {
    mean: f64,
    se: Option<f64>,
    note: Option<String>,
}

fn mean_extinction_value(g: &Graph, lambda: f64, replicas: usize, time_cap: f64, seed: u64) -> Result<MeanValue> {
    if g.n_vertices() <= EXACT_MEAN_LIMIT {
        return Ok(MeanValue {
            mean: exact_expected_extinction(g, lambda)?,
            se: None,
            note: None,
        });
    }
    let est = estimate_mean_extinction(g, lambda, replicas, time_cap, seed)?;
    let mean = est
        .report
        .estimate
        .ok_or_else(|| Error::Precondition("every replica was censored".into()))?;
    Ok(MeanValue {
        mean,
        se: est.report.se,
        note: (est.report.censored > 0)
            .then(|| format!("{} censored replicas; estimate biased low", est.report.censored)),
    })
}

fn validate_parts(g: &Graph, parts: &[Vec<Vertex>]) -> Result<()> {
    if !g.is_tree() {
        return Err(Error::Precondition("product bound needs a tree".into()));
    }
    if parts.is_empty() {
        return Err(Error::Precondition("need at least one part".into()));
    }
    let mut seen = vec![false; g.n_vertices()];
    for part in parts {
        if part.is_empty() {
            return Err(Error::Precondition("parts must be nonempty".into()));
        }
        for &v in part {
            if v >= g.n_vertices() || std::mem::replace(&mut seen[v], true) {
                return Err(Error::Precondition(format!("vertex {v} is out of range or in two parts")));
            }
        }
        if !g.induced(part).0.is_connected() {
            return Err(Error::Precondition(format!("part {part:?} is not connected")));
        }
    }
    Ok(())
}

/// Product lower bounds for `E[τ_G]` from disjoint connected subtrees: the
/// coupling bound with `c_split`, the weak geometric-mean bound, and plain
/// monotonicity `E[τ_G] ≥ max_i E[τ_{G_i}]`.
pub fn check_product_bound(
    g: &Graph,
    parts: &[Vec<Vertex>],
    lambda: f64,
    replicas: usize,
    time_cap: f64,
    base_seed: u64,
    c_split: f64,
) -> Result<Vec<BoundCheck>> {
    validate_parts(g, parts)?;
    if !(c_split > 0.0) {
        return Err(Error::Parameter("c_split must be positive".into()));
    }
    let whole = mean_extinction_value(g, lambda, replicas, time_cap, base_seed)?;
    let mut part_means = Vec::with_capacity(parts.len());
    for part in parts {
        let mut sorted = part.clone();
        sorted.sort_unstable();
        let (sub, _) = g.induced(&sorted);
        part_means.push(mean_extinction_value(&sub, lambda, replicas, time_cap, base_seed)?);
    }
    let exact = whole.se.is_none() && part_means.iter().all(|m| m.se.is_none());
    let k = parts.len() as f64;
    let n = g.n_vertices() as f64;
    let log_product: f64 = part_means.iter().map(|m| m.mean.ln()).sum();
    let largest = part_means.iter().map(|m| m.mean).fold(0.0, f64::max);
    let rel_margin = |x: f64| if exact { EXACT_SLACK * x.abs().max(1.0) } else { 0.0 };
    let mut notes: Vec<String> = Vec::new();
    if let Some(n) = &whole.note {
        notes.push(format!("whole tree: {n}"));
    }
    for (i, m) in part_means.iter().enumerate() {
        if let Some(n) = &m.note {
            notes.push(format!("part {i}: {n}"));
        }
    }
    let base_note = if exact { "exact".to_string() } else { "monte carlo".to_string() };
    let with_notes = |extra: Option<String>| {
        let mut all = vec![base_note.clone()];
        all.extend(extra);
        all.extend(notes.iter().cloned());
        all.join("; ")
    };

    let log_lhs = whole.mean.ln();
    let log_se = whole.se.map(|s| s / whole.mean);
    let log_strong = c_split.ln() - (k + 1.0) * (2.0 * n.powi(3)).ln() + log_product;
    let vacuous = (log_strong < largest.ln())
        .then(|| "correction factor dominates: right side is below the largest part mean, so the bound holds vacuously".to_string());
    let strong = BoundCheck::new(
        "strong product bound",
        log_lhs,
        log_se,
        Relation::AtLeast,
        log_strong,
        if exact { EXACT_SLACK } else { 0.0 },
    )
    .in_logs()
    .noted(with_notes(vacuous));

    let weak_rhs = (0.5f64.ln() + (0.5f64.ln() + log_product) / k).exp();
    let weak = BoundCheck::new("weak product bound", whole.mean, whole.se, Relation::AtLeast, weak_rhs, rel_margin(weak_rhs))
        .noted(with_notes(None));

    let mono = BoundCheck::new("monotonicity", whole.mean, whole.se, Relation::AtLeast, largest, rel_margin(largest))
        .noted(with_notes(None));
    Ok(vec![strong, weak, mono])
}

/// Minimum over singleton starts of `P[ξ^{x}` alive at `T]` with
/// `T = exp(c_eps n / (ln n)^{1+eps})`, against `c_eps`. All singletons
/// share one Harris system per replica.
pub fn survival_floor_check(
    g: &Graph,
    lambda: f64,
    eps: f64,
    c_eps: f64,
    replicas: usize,
    base_seed: u64,
) -> Result<BoundCheck> {
    let n = g.n_vertices();
    if n < 2 {
        return Err(Error::InvalidSize {
            what: "graph for the survival floor",
            got: n,
        });
    }
    if !(eps > 0.0 && c_eps > 0.0) {
        return Err(Error::Parameter("eps and c_eps must be positive".into()));
    }
    let nf = n as f64;
    let horizon = (c_eps * nf / nf.ln().powf(1.0 + eps)).exp();
    let mut worst: Option<(Vertex, f64, f64)> = None;
    for x in 0..n {
        let start = Configuration::from_vertices(n, [x])?;
        let r = survival_probability(g, lambda, &start, horizon, replicas, base_seed)?;
        let p = r.estimate.unwrap_or(0.0);
        if worst.is_none_or(|(_, q, _)| p < q) {
            worst = Some((x, p, r.se.unwrap_or(0.0)));
        }
    }
    let (x, p, se) = worst.expect("n >= 2");
    Ok(
        BoundCheck::new("singleton survival floor", p, Some(se), Relation::AtLeast, c_eps, 0.0)
            .noted(format!("worst start vertex {x}; horizon {horizon}")),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{make_line, make_star, random_tree};

    #[test]
    fn verdict_follows_noise() {
        assert_eq!(BoundCheck::new("a", 1.0, None, Relation::AtMost, 1.0, 0.0).verdict, Verdict::Holds);
        assert_eq!(
            BoundCheck::new("a", 1.1, Some(0.05), Relation::AtMost, 1.0, 0.0).verdict,
            Verdict::ViolatedWithinNoise
        );
        assert_eq!(BoundCheck::new("a", 1.1, None, Relation::AtMost, 1.0, 0.0).verdict, Verdict::Violated);
        assert_eq!(BoundCheck::new("a", 0.9, None, Relation::AtLeast, 1.0, 0.2).verdict, Verdict::Holds);
    }

    #[test]
    fn attract_bound_exact_holds_and_starts_at_zero() {
        let g = make_line(4).unwrap();
        let grid: Vec<f64> = (0..20).map(|k| k as f64).collect();
        let checks = check_attract_bound(&g, 1.0, &grid, 0, 0).unwrap();
        assert_eq!(checks[0].lhs, 0.0);
        assert_eq!(checks[0].rhs, 0.0);
        assert!(checks.iter().all(|c| c.verdict == Verdict::Holds));
    }

    #[test]
    fn product_bound_single_part_is_equality() {
        let g = random_tree(7, 2).unwrap();
        let checks = check_product_bound(&g, &[(0..7).collect()], 1.0, 10, 1e4, 0, 0.5).unwrap();
        let mono = &checks[2];
        assert_eq!(mono.lhs, mono.rhs);
        assert_eq!(mono.verdict, Verdict::Holds);
    }

    #[test]
    fn product_bound_on_split_path() {
        let g = make_line(8).unwrap();
        let checks =
            check_product_bound(&g, &[vec![0, 1, 2, 3], vec![4, 5, 6, 7]], 2.0, 10, 1e4, 0, 0.5).unwrap();
        assert!(checks.iter().all(|c| c.verdict == Verdict::Holds), "{checks:?}");
        assert!(checks[0].note.as_deref().unwrap().contains("vacuously"));
        assert!(checks[0].log_scale);
    }

    #[test]
    fn product_bound_rejects_bad_parts() {
        let g = make_line(6).unwrap();
        for parts in [vec![vec![0, 2]], vec![vec![0, 1], vec![1, 2]], vec![vec![9]], vec![]] {
            assert!(matches!(
                check_product_bound(&g, &parts, 1.0, 10, 10.0, 0, 0.5),
                Err(Error::Precondition(_))
            ));
        }
    }

    #[test]
    fn survival_floor_reports_worst_singleton() {
        let g = make_star(8).unwrap();
        let c = survival_floor_check(&g, 2.0, 0.5, 0.05, 400, 3).unwrap();
        assert!(c.lhs > 0.0 && c.lhs <= 1.0);
        assert_eq!(c.relation, Relation::AtLeast);
        assert!(survival_floor_check(&make_line(1).unwrap(), 2.0, 0.5, 0.05, 10, 0).is_err());
    }
}
