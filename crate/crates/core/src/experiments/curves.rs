use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::estimate_mean_extinction;
use crate::error::{Error, Result};
use crate::graphs::{make_line, make_star, random_tree, Graph};
use crate::harris::Configuration;
use crate::process::{coupling_trace, CouplingStatus};
use crate::replicas::{map_replicas, replica_seed};
use crate::report::{ConfigEcho, ExperimentReport};

/// `P[ξ^start_t ≠ 0, ξ^start_t ≠ ξ^1_t]` at each grid time. Each replica
/// contributes a 0/1 path that can only drop, so the curve is nonincreasing.
pub fn coupling_decay_curve(
    g: &Graph,
    lambda: f64,
    start: &Configuration,
    t_grid: &[f64],
    replicas: usize,
    base_seed: u64,
) -> Result<Vec<ExperimentReport>> {
    if replicas == 0 {
        return Err(Error::Parameter("need at least one replica".into()));
    }
    let traces = map_replicas(replicas, base_seed, |_, seed| {
        coupling_trace(g, lambda, start, t_grid, seed)
    });
    let mut decoupled = vec![0usize; t_grid.len()];
    for trace in traces {
        let trace = trace?;
        let mut settled = false;
        for (count, status) in decoupled.iter_mut().zip(trace) {
            match status {
                CouplingStatus::Decoupled if settled => {
                    return Err(Error::Defect("coupling status left an absorbing state".into()));
                }
                CouplingStatus::Decoupled => *count += 1,
                _ => settled = true,
            }
        }
    }
    Ok(t_grid
        .iter()
        .zip(decoupled)
        .map(|(&t, k)| {
            let config = ConfigEcho::new(lambda, g)
                .with("t", t)
                .with("start", start.iter().collect::<Vec<_>>());
            ExperimentReport::proportion("decoupling_probability", k, replicas, base_seed, config)
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Line,
    Star,
    RandomTree,
}

impl Family {
    /// Member of the family with `size` vertices; random trees draw their
    /// shape from `seed`.
    pub fn member(self, size: usize, seed: u64) -> Result<Graph> {
        match self {
            Family::Line => make_line(size),
            Family::Star => make_star(size),
            Family::RandomTree => random_tree(size, seed),
        }
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "line" => Ok(Family::Line),
            "star" => Ok(Family::Star),
            "random_tree" | "random-tree" | "tree" => Ok(Family::RandomTree),
            other => Err(Error::Parameter(format!("unknown family {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthRow {
    pub size: usize,
    pub report: ExperimentReport,
}

/// Least-squares line through `(size, ln mean)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub points: usize,
    /// Absent with fewer than three points.
    pub se: Option<f64>,
    /// 95% t-interval for the slope.
    pub interval: Option<(f64, f64)>,
}

impl SlopeFit {
    pub fn fit(points: &[(f64, f64)]) -> Option<SlopeFit> {
        let k = points.len();
        if k < 2 {
            return None;
        }
        let kf = k as f64;
        let mx = points.iter().map(|p| p.0).sum::<f64>() / kf;
        let my = points.iter().map(|p| p.1).sum::<f64>() / kf;
        let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
        if sxx == 0.0 {
            return None;
        }
        let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        let (se, interval) = if k >= 3 {
            let ssr: f64 = points
                .iter()
                .map(|p| (p.1 - intercept - slope * p.0).powi(2))
                .sum();
            let se = (ssr / (kf - 2.0) / sxx).sqrt();
            let t = StudentsT::new(0.0, 1.0, kf - 2.0)
                .expect("positive degrees of freedom")
                .inverse_cdf(0.975);
            (Some(se), Some((slope - t * se, slope + t * se)))
        } else {
            (None, None)
        };
        Some(SlopeFit {
            slope,
            intercept,
            points: k,
            se,
            interval,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthCurve {
    pub family: Family,
    pub lambda: f64,
    pub rows: Vec<GrowthRow>,
    /// Fit over the sizes with no censored replica.
    pub fit: Option<SlopeFit>,
}

/// Mean extinction time across sizes of a family and the slope of its
/// logarithm. Every size uses its own seed stream derived from `base_seed`.
pub fn growth_curve(
    family: Family,
    sizes: &[usize],
    lambda: f64,
    replicas: usize,
    time_cap: f64,
    base_seed: u64,
) -> Result<GrowthCurve> {
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Parameter("sizes must be strictly increasing".into()));
    }
    let mut rows = Vec::with_capacity(sizes.len());
    for &size in sizes {
        let seed = replica_seed(base_seed, size as u64);
        let g = family.member(size, seed)?;
        let mut report = estimate_mean_extinction(&g, lambda, replicas, time_cap, seed)?.report;
        report.config = report.config.with("size", size);
        rows.push(GrowthRow { size, report });
    }
    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.report.censored == 0)
        .filter_map(|r| r.report.estimate.map(|m| (r.size as f64, m.ln())))
        .collect();
    Ok(GrowthCurve {
        family,
        lambda,
        fit: SlopeFit::fit(&points),
        rows,
    })
}
