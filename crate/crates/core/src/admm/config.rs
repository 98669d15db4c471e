use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::penalty::PenaltyConfig;

/// Solver parameters.
///
/// `rho1` weights the `w = z` split and `rho2` the margin constraint
/// `Hw + by + ξ = s + 1`. `beta > 0` adds the proximal term
/// `(β/2)‖z − z⁽ᵏ⁾‖²` to the z-update.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub penalty: PenaltyConfig,
    pub rho1: f64,
    pub rho2: f64,
    pub beta: f64,
    /// Stop once the relative objective change drops below this.
    pub epsilon: f64,
    pub max_iters: usize,
    /// Seed for the data split. The iteration itself is deterministic.
    pub seed: u64,
}

pub const DEFAULT_EPSILON: f64 = 1e-4;
pub const DEFAULT_MAX_ITERS: usize = 1000;

impl SolverConfig {
    pub fn new(penalty: PenaltyConfig) -> Self {
        Self {
            penalty,
            rho1: 1.0,
            rho2: 1.0,
            beta: 0.0,
            epsilon: DEFAULT_EPSILON,
            max_iters: DEFAULT_MAX_ITERS,
            seed: 0,
        }
    }

    pub fn with_rho(mut self, rho1: f64, rho2: f64) -> Self {
        self.rho1 = rho1;
        self.rho2 = rho2;
        self
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.penalty.validate()?;
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidConfig(format!(
                    "{name} must be positive and finite, got {v}"
                )))
            }
        };
        positive("rho1", self.rho1)?;
        positive("rho2", self.rho2)?;
        positive("epsilon", self.epsilon)?;
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "beta must be nonnegative and finite, got {}",
                self.beta
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be at least 1".into()));
        }
        Ok(())
    }
}
