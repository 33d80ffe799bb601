//! Run configuration shared by every command: exponent, combinatorics,
//! truncation degree, tolerances, and output location.

use std::path::PathBuf;

use renormlab_core::UnimodalPermutation;
use serde::{Deserialize, Serialize};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "RENORMLAB_OUT";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Tolerances {
    /// Operator residual the Newton solve must reach.
    pub newton: f64,
    /// Orbit-return miss allowed when certifying a located cycle.
    pub cycle: f64,
    /// Step of the finite-difference cross-check of the linearization.
    pub fd_step: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            newton: 1e-10,
            cycle: 1e-12,
            fd_step: 1e-6,
        }
    }
}

/// Named combinatorics: only the period-doubling type is built in.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SigmaSpec {
    pub name: String,
    pub period: usize,
}

impl Default for SigmaSpec {
    fn default() -> Self {
        SigmaSpec {
            name: "doubling".into(),
            period: 2,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub alpha: f64,
    pub sigma: SigmaSpec,
    pub degree: usize,
    pub tolerances: Tolerances,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            alpha: 2.0,
            sigma: SigmaSpec::default(),
            degree: 60,
            tolerances: Tolerances::default(),
            out_dir: default_out_dir(),
        }
    }
}

pub fn default_out_dir() -> PathBuf {
    std::env::var_os(OUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."))
}

impl RunConfig {
    /// Usage-level validation; rejects values before any numerics run.
    pub fn validate(&self) -> Result<(), String> {
        if !(self.alpha > 1.0) {
            return Err(format!("alpha must exceed 1, got {}", self.alpha));
        }
        if self.degree < 16 {
            return Err(format!("degree must be at least 16, got {}", self.degree));
        }
        let t = &self.tolerances;
        for (name, v) in [("newton", t.newton), ("cycle", t.cycle), ("fd-step", t.fd_step)] {
            if !(v > 0.0) {
                return Err(format!("{name} tolerance must be positive, got {v}"));
            }
        }
        if t.fd_step >= 1e-2 {
            return Err(format!(
                "fd-step {} too coarse for a finite-difference check",
                t.fd_step
            ));
        }
        self.permutation().map(|_| ())
    }

    /// The combinatorics named by the config.
    pub fn permutation(&self) -> Result<UnimodalPermutation, String> {
        match (self.sigma.name.as_str(), self.sigma.period) {
            ("doubling", 2) => Ok(UnimodalPermutation::doubling()),
            ("doubling", p) => Err(format!("doubling combinatorics has period 2, got {p}")),
            (name, _) => Err(format!("unknown combinatorics '{name}'")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        assert!(RunConfig::default().validate().is_ok());
    }

    #[test]
    fn bad_values_are_rejected_with_field_names() {
        let mut c = RunConfig::default();
        c.degree = 8;
        assert!(c.validate().unwrap_err().contains("degree"));
        let mut c = RunConfig::default();
        c.tolerances.newton = 0.0;
        assert!(c.validate().unwrap_err().contains("newton"));
        let mut c = RunConfig::default();
        c.sigma.name = "tripling".into();
        assert!(c.validate().unwrap_err().contains("tripling"));
        let mut c = RunConfig::default();
        c.alpha = 0.5;
        assert!(c.validate().unwrap_err().contains("alpha"));
    }
}
