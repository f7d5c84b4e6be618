use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_RESAMPLES: usize = 2000;
const MIN_SAMPLES: usize = 50;
/// Bootstrap seed used when the caller does not choose one.
const DEFAULT_BOOTSTRAP_SEED: u64 = 0x6578_7031;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Exp1Test {
    pub ks_distance: f64,
    /// Upper `alpha` quantile of the bootstrap null distribution.
    pub threshold: f64,
    pub pass: bool,
    pub n_samples: usize,
    pub alpha: f64,
    pub resamples: usize,
    pub bootstrap_seed: u64,
}

/// Kolmogorov–Smirnov distance between the samples divided by their mean
/// and the `Exp(1)` law.
pub fn ks_distance_exp1(samples: &[f64]) -> f64 {
    let mut x = samples.to_vec();
    normalized_ks(&mut x)
}

fn normalized_ks(x: &mut [f64]) -> f64 {
    let n = x.len() as f64;
    x.sort_by(f64::total_cmp);
    let mean = x.iter().sum::<f64>() / n;
    let mut d = 0.0f64;
    for (i, v) in x.iter().enumerate() {
        let f = 1.0 - (-v / mean).exp();
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    d
}

/// Goodness of fit of mean-normalized samples to `Exp(1)` with the default
/// bootstrap size and seed.
pub fn exp1_test(samples: &[f64], alpha: f64) -> Result<Exp1Test> {
    exp1_test_with(samples, alpha, DEFAULT_RESAMPLES, DEFAULT_BOOTSTRAP_SEED)
}

/// Rejects when the KS distance exceeds the `1 - alpha` quantile of the same
/// statistic over `resamples` exponential samples of equal size, each
/// normalized by its own mean.
pub fn exp1_test_with(
    samples: &[f64],
    alpha: f64,
    resamples: usize,
    bootstrap_seed: u64,
) -> Result<Exp1Test> {
    if samples.len() < MIN_SAMPLES {
        return Err(Error::Precondition(format!(
            "need at least {MIN_SAMPLES} uncensored samples, got {}",
            samples.len()
        )));
    }
    if samples.iter().any(|s| !(*s >= 0.0) || !s.is_finite()) || samples.iter().all(|&s| s == 0.0) {
        return Err(Error::Precondition("samples must be finite, nonnegative and not all zero".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Parameter(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if resamples < 10 {
        return Err(Error::Parameter("need at least 10 bootstrap resamples".into()));
    }
    let ks_distance = ks_distance_exp1(samples);
    let mut rng = ChaCha8Rng::seed_from_u64(bootstrap_seed);
    let mut buf = vec![0.0; samples.len()];
    let mut null: Vec<f64> = (0..resamples)
        .map(|_| {
            for b in buf.iter_mut() {
                *b = rng.sample(Exp1);
            }
            normalized_ks(&mut buf)
        })
        .collect();
    null.sort_by(f64::total_cmp);
    let rank = (((1.0 - alpha) * resamples as f64).ceil() as usize).clamp(1, resamples);
    let threshold = null[rank - 1];
    Ok(Exp1Test {
        ks_distance,
        threshold,
        pass: ks_distance <= threshold,
        n_samples: samples.len(),
        alpha,
        resamples,
        bootstrap_seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp_samples(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| 3.0 * rng.sample::<f64, _>(Exp1)).collect()
    }

    #[test]
    fn exponential_samples_pass() {
        let t = exp1_test(&exp_samples(2000, 4), 0.01).unwrap();
        assert!(t.pass, "{t:?}");
        assert!(t.threshold > 0.0 && t.threshold < 0.05);
    }

    #[test]
    fn constant_and_uniform_samples_fail() {
        assert!(!exp1_test(&[5.0; 200], 0.01).unwrap().pass);
        let uniform: Vec<f64> = (0..500).map(|i| i as f64 / 500.0).collect();
        assert!(!exp1_test(&uniform, 0.01).unwrap().pass);
    }

    #[test]
    fn preconditions() {
        assert!(matches!(exp1_test(&[1.0; 49], 0.01), Err(Error::Precondition(_))));
        assert!(exp1_test(&[0.0; 60], 0.01).is_err());
        assert!(exp1_test(&[1.0; 60], 1.5).is_err());
    }

    #[test]
    fn scale_free() {
        let a = exp_samples(100, 1);
        let b: Vec<f64> = a.iter().map(|x| 7.5 * x).collect();
        assert!((ks_distance_exp1(&a) - ks_distance_exp1(&b)).abs() < 1e-12);
    }
}
