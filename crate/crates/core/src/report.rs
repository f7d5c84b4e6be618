//! Structured Monte Carlo results and the sample statistics behind them.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::constants::Constants;
use crate::graphs::{Graph, Shape};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Everything needed to reproduce a report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub lambda: f64,
    pub graph: String,
    pub constants: Option<Constants>,
    /// Operation-specific parameters (times, start sets, caps).
    #[serde(flatten)]
    pub params: BTreeMap<String, serde_json::Value>,
}

impl ConfigEcho {
    pub fn new(lambda: f64, graph: &Graph) -> Self {
        ConfigEcho {
            lambda,
            graph: describe_graph(graph),
            constants: None,
            params: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl Serialize) -> Self {
        self.params.insert(
            key.to_string(),
            serde_json::to_value(value).expect("parameters serialize"),
        );
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub quantity: String,
    /// Absent when no replica produced a usable value.
    pub estimate: Option<f64>,
    pub se: Option<f64>,
    pub replicas: usize,
    pub censored: usize,
    pub seed: u64,
    pub config: ConfigEcho,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval: Option<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
}

impl ExperimentReport {
    /// Report of a sample mean over uncensored values.
    pub fn mean(
        quantity: &str,
        values: &[f64],
        censored: usize,
        seed: u64,
        config: ConfigEcho,
    ) -> Self {
        let stats = SampleStats::from_values(values);
        let mut flags = Vec::new();
        if censored > 0 {
            flags.push("biased-low: censored replicas excluded from the mean".to_string());
        }
        let (estimate, se) = match stats {
            Some(s) => (Some(s.mean), Some(s.se)),
            None => (None, None),
        };
        ExperimentReport {
            quantity: quantity.to_string(),
            estimate,
            se,
            replicas: values.len() + censored,
            censored,
            seed,
            config,
            interval: estimate.zip(se).map(|(m, s)| (m - Z95 * s, m + Z95 * s)),
            flags,
        }
    }

    /// Report of a proportion with its Wilson score interval.
    pub fn proportion(
        quantity: &str,
        successes: usize,
        trials: usize,
        seed: u64,
        config: ConfigEcho,
    ) -> Self {
        let (estimate, se, interval) = if trials == 0 {
            (None, None, None)
        } else {
            let p = successes as f64 / trials as f64;
            let se = (p * (1.0 - p) / trials as f64).sqrt();
            (Some(p), Some(se), Some(wilson_interval(successes, trials, Z95)))
        };
        ExperimentReport {
            quantity: quantity.to_string(),
            estimate,
            se,
            replicas: trials,
            censored: 0,
            seed,
            config,
            interval,
            flags: Vec::new(),
        }
    }

    pub fn is_biased_low(&self) -> bool {
        self.censored > 0
    }
}

/// Mean and standard error of a sample.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleStats {
    pub count: usize,
    pub mean: f64,
    pub sd: f64,
    pub se: f64,
}

impl SampleStats {
    /// Sums in sorted order so the result does not depend on the order the
    /// values arrived in. `None` for an empty sample; `sd = 0` for one value.
    pub fn from_values(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let k = sorted.len() as f64;
        let mean = sorted.iter().sum::<f64>() / k;
        let mut dev: Vec<f64> = sorted.iter().map(|v| (v - mean) * (v - mean)).collect();
        dev.sort_by(f64::total_cmp);
        let var = if sorted.len() > 1 {
            dev.iter().sum::<f64>() / (k - 1.0)
        } else {
            0.0
        };
        let sd = var.sqrt();
        Some(SampleStats {
            count: sorted.len(),
            mean,
            sd,
            se: sd / k.sqrt(),
        })
    }
}

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: usize, trials: usize, z: f64) -> (f64, f64) {
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if successes == trials { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

/// Short descriptor used in report echoes when the caller gives none.
pub fn describe_graph(g: &Graph) -> String {
    let n = g.n_vertices();
    match g.shape() {
        Some(Shape::Line { ends: (0, b) }) if b + 1 == n || n == 1 => format!("line:{n}"),
        Some(Shape::Star { center: 0 }) => format!("star:{n}"),
        _ if g.is_tree() => format!("tree(n={n})"),
        _ => format!("graph(n={n},m={})", g.n_edges()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{make_line, make_star};

    #[test]
    fn stats_basic() {
        let s = SampleStats::from_values(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(s.mean, 2.5);
        assert!((s.sd - (5.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert!(SampleStats::from_values(&[]).is_none());
        assert_eq!(SampleStats::from_values(&[3.0]).unwrap().se, 0.0);
    }

    #[test]
    fn stats_are_order_independent() {
        let a = [0.1, 1e9, 3.3, 7.0, 1e-7, 2.2];
        let mut b = a;
        b.reverse();
        assert_eq!(SampleStats::from_values(&a), SampleStats::from_values(&b));
    }

    #[test]
    fn wilson_known_value() {
        // 8 of 10 at z = 1.96: (0.4902, 0.9433).
        let (lo, hi) = wilson_interval(8, 10, 1.96);
        assert!((lo - 0.4902).abs() < 1e-3 && (hi - 0.9433).abs() < 1e-3);
        let (lo, hi) = wilson_interval(0, 50, Z95);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.1);
    }

    #[test]
    fn censoring_flags_bias() {
        let cfg = ConfigEcho::new(2.0, &make_line(3).unwrap());
        let r = ExperimentReport::mean("tau", &[1.0, 2.0], 1, 0, cfg.clone());
        assert!(r.is_biased_low());
        assert_eq!(r.replicas, 3);
        let none = ExperimentReport::mean("tau", &[], 4, 0, cfg);
        assert_eq!(none.estimate, None);
    }

    #[test]
    fn report_json_schema() {
        let cfg = ConfigEcho::new(2.0, &make_star(8).unwrap()).with("time_cap", 10.0);
        let r = ExperimentReport::mean("mean_extinction_time", &[1.0, 3.0], 0, 7, cfg);
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        for key in ["quantity", "estimate", "se", "replicas", "censored", "seed", "config"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["config"]["graph"], "star:8");
        assert_eq!(v["config"]["lambda"], 2.0);
        assert!(v["config"].get("constants").is_some());
        assert_eq!(v["config"]["time_cap"], 10.0);
    }
}
