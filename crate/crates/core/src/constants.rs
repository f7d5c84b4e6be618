use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Default,
    Calibrated,
    User,
}

/// The named positive constants of the extinction-time estimates. Only their
/// existence is known, so they are configuration with recorded provenance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub c_line: f64,
    pub c_star: f64,
    pub c0: f64,
    pub c_coup: f64,
    pub c_split: f64,
    pub c_eps: f64,
    pub provenance: Provenance,
}

impl Default for Constants {
    fn default() -> Self {
        Constants::derived(0.05, 0.05, 0.05, 0.5, 0.05, Provenance::Default)
    }
}

impl Constants {
    /// Builds constants with `c0 = min(c_line, c_star) / 3`.
    pub fn derived(
        c_line: f64,
        c_star: f64,
        c_coup: f64,
        c_split: f64,
        c_eps: f64,
        provenance: Provenance,
    ) -> Self {
        Constants {
            c_line,
            c_star,
            c0: c_line.min(c_star) / 3.0,
            c_coup,
            c_split,
            c_eps,
            provenance,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            ("c_line", self.c_line),
            ("c_star", self.c_star),
            ("c0", self.c0),
            ("c_coup", self.c_coup),
            ("c_split", self.c_split),
            ("c_eps", self.c_eps),
        ];
        for (name, v) in all {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Parameter(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_derivation_rule() {
        let c = Constants::default();
        assert_eq!(c.c0, c.c_line.min(c.c_star) / 3.0);
        assert_eq!(c.c_split, 0.5);
        assert!(c.validate().is_ok());
        let d = Constants::derived(0.3, 0.12, 0.1, 0.5, 0.1, Provenance::User);
        assert!((d.c0 - 0.04).abs() < 1e-15);
    }
}
