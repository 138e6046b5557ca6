use serde::{Deserialize, Serialize};

use crate::model::{EstimationConfig, PROB_FLOOR};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClusterConfig {
    /// Equally spaced rank thresholds tried per split search.
    pub n_thresholds: usize,
    /// Minimum profile size; `None` means `max(50, ceil(0.01 * R))`.
    pub min_leaf: Option<usize>,
    pub max_profiles: usize,
    #[serde(flatten)]
    pub estimation: EstimationConfig,
    pub prob_floor: f64,
    pub em_max_iter: usize,
    /// Secondary EM stop on objective improvement.
    pub em_tol: f64,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        Self {
            n_thresholds: 50,
            min_leaf: None,
            max_profiles: 32,
            estimation: EstimationConfig::default(),
            prob_floor: PROB_FLOOR,
            em_max_iter: 100,
            em_tol: 1e-6,
        }
    }
}

impl ClusterConfig {
    pub fn min_leaf_for(&self, n_subjects: usize) -> usize {
        self.min_leaf
            .unwrap_or_else(|| 50.max((0.01 * n_subjects as f64).ceil() as usize))
            .max(1)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.n_thresholds == 0 {
            return bad("n_thresholds must be at least 1");
        }
        if self.min_leaf == Some(0) {
            return bad("min_leaf must be at least 1");
        }
        if self.max_profiles == 0 {
            return bad("max_profiles must be at least 1");
        }
        if !(self.estimation.smoothing >= 0.0 && self.estimation.smoothing.is_finite()) {
            return bad("smoothing must be a finite non-negative number");
        }
        if !(self.estimation.rate_max > 0.0 && self.estimation.rate_max.is_finite()) {
            return bad("rate_max must be positive");
        }
        if !(self.prob_floor > 0.0 && self.prob_floor < 1.0) {
            return bad("prob_floor must lie in (0, 1)");
        }
        if self.em_max_iter == 0 {
            return bad("em_max_iter must be at least 1");
        }
        if !(self.em_tol >= 0.0) {
            return bad("em_tol must be non-negative");
        }
        Ok(())
    }
}
