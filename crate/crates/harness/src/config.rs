//! Experiment configuration.
//!
//! Config files are flat TOML: one `key = value` per line, no tables. Every
//! key is optional except `seed`; missing keys take the defaults below.
//!
//! ```toml
//! experiment = "multiplier"
//! seed = 7
//! n = 512
//! trials = 400
//! dim = 16
//! class_size = 32
//! ensemble = "gaussian"
//! multiplier = "student"
//! multiplier_tail = 4.0
//! q = 3.5
//! u = 4.0
//! w = 4.0
//! s0 = 0
//! target = 0.99
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use chainbound::dist::{Dist, DistKind};
use chainbound::processes::{EnsembleKind, EnsembleSpec, MultiplierSpec};

use crate::HarnessError;

/// Names accepted by `simulate --experiment`.
pub const EXPERIMENTS: &[&str] = &[
    "multiplier",
    "multiplier_coordinate",
    "multiplier_q_sweep",
    "quadratic",
    "quadratic_log_concave",
    "psi2_multiplier",
    "subgaussian_scaling",
    "symmetrization",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub experiment: String,
    /// Mandatory master seed.
    pub seed: Option<u64>,
    /// Sample size `N`.
    pub n: usize,
    /// Trials per phase (calibration and fresh each).
    pub trials: usize,
    pub dim: usize,
    /// Size of the generated class when no `class_file` is given.
    pub class_size: usize,
    /// CSV with one class vector per row.
    pub class_file: Option<PathBuf>,
    /// gaussian, rademacher, exponential, laplace, pareto, student.
    pub ensemble: String,
    /// Tail index or degrees of freedom for pareto and student ensembles.
    pub ensemble_tail: f64,
    /// gaussian, rademacher, student, pareto or coordinate.
    pub multiplier: String,
    pub multiplier_tail: f64,
    /// Moment order `q` of the multiplier or the class.
    pub q: f64,
    pub r: f64,
    pub p: f64,
    pub beta: f64,
    pub u: f64,
    pub w: f64,
    pub s0: usize,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    /// Coverage target used to fit constants.
    pub target: f64,
    /// Monte Carlo samples for mean widths.
    pub width_samples: usize,
    pub out_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: "multiplier".into(),
            seed: None,
            n: 512,
            trials: 400,
            dim: 16,
            class_size: 32,
            class_file: None,
            ensemble: "gaussian".into(),
            ensemble_tail: 5.0,
            multiplier: "student".into(),
            multiplier_tail: 4.0,
            q: 3.5,
            r: 2.0,
            p: 8.0,
            beta: 0.5,
            u: 4.0,
            w: 4.0,
            s0: 0,
            c0: 1.0,
            c1: 1.0,
            c2: 1.0,
            c3: 1.0,
            target: 0.99,
            width_samples: 20_000,
            out_dir: None,
        }
    }
}

fn bad(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(msg.into())
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e| bad(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn seed(&self) -> Result<u64, HarnessError> {
        self.seed.ok_or_else(|| bad("seed is mandatory"))
    }

    /// Checks every constraint the target modules impose, naming the first
    /// one violated.
    pub fn validate(&self) -> Result<(), HarnessError> {
        self.seed()?;
        if !EXPERIMENTS.contains(&self.experiment.as_str()) {
            return Err(bad(format!("experiment must be one of {EXPERIMENTS:?}, got {:?}", self.experiment)));
        }
        let positive = [("n", self.n), ("trials", self.trials), ("dim", self.dim), ("class_size", self.class_size)];
        for (name, v) in positive {
            if v == 0 {
                return Err(bad(format!("{name} must be positive")));
            }
        }
        if self.width_samples == 0 {
            return Err(bad("width_samples must be positive"));
        }
        if !(self.q > 2.0) {
            return Err(bad(format!("q must exceed 2, got {}", self.q)));
        }
        if !(self.r >= 1.0 && self.r < self.q) {
            return Err(bad(format!("r must satisfy 1 <= r < q, got r = {}", self.r)));
        }
        if !(self.p >= 1.0) {
            return Err(bad(format!("p must be at least 1, got {}", self.p)));
        }
        if !(self.beta > 0.0 && self.beta <= self.q / self.r - 1.0) {
            return Err(bad(format!("beta must lie in (0, q/r - 1], got {}", self.beta)));
        }
        if !(self.u >= 1.0) || !(self.w >= 1.0) {
            return Err(bad("u and w must be at least 1"));
        }
        for (name, c) in [("c0", self.c0), ("c1", self.c1), ("c2", self.c2), ("c3", self.c3)] {
            if !(c > 0.0 && c.is_finite()) {
                return Err(bad(format!("{name} must be positive and finite")));
            }
        }
        if !(self.target > 0.0 && self.target < 1.0) {
            return Err(bad(format!("target must lie in (0, 1), got {}", self.target)));
        }
        self.ensemble_spec()?;
        self.multiplier_spec()?;
        Ok(())
    }

    pub fn ensemble_spec(&self) -> Result<EnsembleSpec, HarnessError> {
        let kind = match self.ensemble.as_str() {
            "gaussian" => EnsembleKind::Gaussian,
            "rademacher" => EnsembleKind::Rademacher,
            "exponential" => EnsembleKind::Exponential,
            "laplace" => EnsembleKind::Laplace,
            "pareto" => EnsembleKind::Pareto { q: self.ensemble_tail },
            "student" => EnsembleKind::Student { q: self.ensemble_tail },
            other => return Err(bad(format!("unknown ensemble {other:?}"))),
        };
        EnsembleSpec::new(kind, self.dim).map_err(|e| bad(format!("ensemble: {e}")))
    }

    /// The multiplier; `coordinate` couples `xi = <X, theta>` with `theta` the
    /// first class vector, filled in by the caller.
    pub fn multiplier_spec(&self) -> Result<MultiplierSpec, HarnessError> {
        let kind = match self.multiplier.as_str() {
            "gaussian" => DistKind::Gaussian,
            "rademacher" => DistKind::Rademacher,
            "student" => DistKind::StudentT { dof: self.multiplier_tail },
            "pareto" => DistKind::SymmetricPareto { tail: self.multiplier_tail },
            "coordinate" => return Ok(MultiplierSpec::Coordinate { theta: vec![0.0; self.dim] }),
            other => return Err(bad(format!("unknown multiplier {other:?}"))),
        };
        let dist = Dist::new(kind)
            .and_then(|d| d.standardized())
            .map_err(|e| bad(format!("multiplier: {e}")))?;
        Ok(MultiplierSpec::Independent { dist })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_idempotent() {
        let c = ExperimentConfig::parse("seed = 3\nexperiment = \"quadratic\"\nq = 8.0\n").unwrap();
        let once = c.to_toml();
        let again = ExperimentConfig::parse(&once).unwrap();
        assert_eq!(c, again);
        assert_eq!(once, again.to_toml());
    }

    #[test]
    fn seed_is_mandatory() {
        let c = ExperimentConfig::parse("n = 10").unwrap();
        assert!(c.validate().unwrap_err().to_string().contains("seed"));
    }

    #[test]
    fn violations_are_named() {
        let c = ExperimentConfig::parse("seed = 1\nr = 5.0").unwrap();
        assert!(c.validate().unwrap_err().to_string().contains("r must satisfy"));
        assert!(ExperimentConfig::parse("seed = 1\nbogus = 2").is_err());
        let c = ExperimentConfig::parse("seed = 1\nmultiplier = \"student\"\nmultiplier_tail = -1.0").unwrap();
        assert!(c.validate().is_err());
    }
}
