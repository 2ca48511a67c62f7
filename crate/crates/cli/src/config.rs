//! Optimization run configuration.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use notgate::objectives::Objective;
use notgate::pulse::COEFF_BOUND;
use notgate::{Error, Result};

/// JSON configuration of an `optimize` invocation. Every field except
/// `objectives` has a default.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Ordered objective pair, e.g. `["JdH", "JOmega"]`.
    pub objectives: [Objective; 2],
    #[serde(default = "default_harmonics")]
    pub n_harmonics: usize,
    #[serde(default = "default_population")]
    pub population: usize,
    #[serde(default = "default_generations")]
    pub generations: usize,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Quadrature grid used for objective evaluation during the search.
    #[serde(default = "default_grid")]
    pub grid: usize,
    /// Box half-width for every decision variable.
    #[serde(default = "default_bounds")]
    pub bounds: f64,
    #[serde(default = "default_sigma0")]
    pub sigma0: f64,
    /// First-objective threshold of the knee-point rule.
    #[serde(default = "default_knee_threshold")]
    pub knee_threshold: f64,
    #[serde(default = "default_symmetric")]
    pub symmetric: bool,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

fn default_harmonics() -> usize {
    3
}
fn default_population() -> usize {
    100
}
fn default_generations() -> usize {
    300
}
fn default_runs() -> usize {
    10
}
fn default_seed() -> u64 {
    crate::DEFAULT_SEED
}
fn default_grid() -> usize {
    1024
}
fn default_bounds() -> f64 {
    COEFF_BOUND
}
fn default_sigma0() -> f64 {
    0.6
}
fn default_knee_threshold() -> f64 {
    0.0005
}
fn default_symmetric() -> bool {
    true
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.objectives[0] == self.objectives[1] {
            return Err(Error::InvalidConfig("objectives must be distinct".into()));
        }
        if self.n_harmonics == 0 {
            return Err(Error::InvalidConfig("need at least one harmonic".into()));
        }
        for (name, value) in [
            ("population", self.population),
            ("generations", self.generations),
            ("runs", self.runs),
        ] {
            if value == 0 {
                return Err(Error::InvalidConfig(format!("{name} must be at least 1")));
            }
        }
        if !(self.bounds > 0.0 && self.bounds.is_finite()) {
            return Err(Error::InvalidConfig("bounds must be positive".into()));
        }
        if !(self.sigma0 > 0.0 && self.sigma0.is_finite()) {
            return Err(Error::InvalidConfig("sigma0 must be positive".into()));
        }
        if self.grid < notgate::objectives::MIN_GRID {
            return Err(Error::GridTooSmall {
                got: self.grid,
                min: notgate::objectives::MIN_GRID,
            });
        }
        Ok(())
    }

    /// Decision-space dimension: `(a_1..a_{n-1}, b_1..b_n)`.
    pub fn dimension(&self) -> usize {
        2 * self.n_harmonics - 1
    }
}
