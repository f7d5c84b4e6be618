//! Monte Carlo estimators, the exponential-law test, inequality checks,
//! curves over time and size, and calibration of the model constants.

mod bounds;
mod calibrate;
mod curves;
mod exp1;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::Graph;
use crate::process::extinction_time;
use crate::replicas::map_replicas;
use crate::report::{ConfigEcho, ExperimentReport};

pub use bounds::{
    check_attract_bound, check_attract_bound_mc, check_product_bound, survival_floor_check,
    BoundCheck, Relation, Verdict,
};
pub use calibrate::{calibrate_constants, Calibration, Probe};
pub use curves::{coupling_decay_curve, growth_curve, Family, GrowthCurve, GrowthRow, SlopeFit};
pub use exp1::{exp1_test, exp1_test_with, ks_distance_exp1, Exp1Test, DEFAULT_RESAMPLES};

/// One replica of an extinction-time experiment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtinctionSample {
    pub replica: usize,
    pub seed: u64,
    /// `None` when the run was still alive at the cap.
    pub value: Option<f64>,
}

/// Mean extinction time estimate together with its per-replica samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanExtinction {
    pub report: ExperimentReport,
    pub samples: Vec<ExtinctionSample>,
}

impl MeanExtinction {
    /// Uncensored extinction times in replica order.
    pub fn values(&self) -> Vec<f64> {
        self.samples.iter().filter_map(|s| s.value).collect()
    }

    /// CSV `replica,seed,value,censored`; a censored row carries the cap.
    pub fn samples_csv(&self) -> String {
        let cap = self
            .report
            .config
            .params
            .get("time_cap")
            .and_then(serde_json::Value::as_f64)
            .unwrap_or(f64::INFINITY);
        let mut out = String::from("replica,seed,value,censored\n");
        for s in &self.samples {
            let (v, c) = match s.value {
                Some(v) => (v, 0),
                None => (cap, 1),
            };
            writeln!(out, "{},{},{v},{c}", s.replica, s.seed).expect("writing to a String");
        }
        out
    }
}

/// Sample mean of `τ` from full occupancy over `replicas` independent runs,
/// censored at `time_cap`. Censored runs are counted but excluded from the
/// mean, which is then flagged as biased low.
pub fn estimate_mean_extinction(
    g: &Graph,
    lambda: f64,
    replicas: usize,
    time_cap: f64,
    base_seed: u64,
) -> Result<MeanExtinction> {
    if replicas < 2 {
        return Err(Error::Parameter(format!("need at least 2 replicas, got {replicas}")));
    }
    let runs = map_replicas(replicas, base_seed, |i, seed| {
        extinction_time(g, lambda, seed, time_cap).map(|value| ExtinctionSample {
            replica: i,
            seed,
            value,
        })
    });
    let samples = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let values: Vec<f64> = samples.iter().filter_map(|s| s.value).collect();
    let censored = samples.len() - values.len();
    let config = ConfigEcho::new(lambda, g).with("time_cap", time_cap);
    Ok(MeanExtinction {
        report: ExperimentReport::mean("mean_extinction_time", &values, censored, base_seed, config),
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{make_line, make_star};

    #[test]
    fn single_vertex_mean_is_one() {
        let g = make_line(1).unwrap();
        let r = estimate_mean_extinction(&g, 2.0, 10_000, 1e6, 1).unwrap().report;
        let (m, se) = (r.estimate.unwrap(), r.se.unwrap());
        assert!((m - 1.0).abs() < 3.0 * se && se < 0.011, "{m} ± {se}");
    }

    #[test]
    fn all_censored_has_no_estimate() {
        let g = make_star(10).unwrap();
        let m = estimate_mean_extinction(&g, 4.0, 20, 0.5, 0).unwrap();
        assert_eq!(m.report.censored, 20);
        assert_eq!(m.report.estimate, None);
        assert!(m.report.is_biased_low());
        assert!(m.samples_csv().lines().nth(1).unwrap().ends_with(",0.5,1"));
    }

    #[test]
    fn too_few_replicas() {
        let g = make_line(2).unwrap();
        assert!(estimate_mean_extinction(&g, 1.0, 1, 10.0, 0).is_err());
    }

    #[test]
    fn rerun_is_bit_identical() {
        let g = make_star(6).unwrap();
        let a = estimate_mean_extinction(&g, 1.0, 300, 1e4, 42).unwrap();
        let b = estimate_mean_extinction(&g, 1.0, 300, 1e4, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.samples_csv(), b.samples_csv());
    }
}
