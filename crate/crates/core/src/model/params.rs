use serde::{Deserialize, Serialize};

use super::SufficientStats;
use crate::{Error, Result};

/// Upper bound on any estimated rate (events per month).
pub const RATE_MAX: f64 = 1.0e4;

/// Rate used when a corpus has no retained interarrival at all.
pub const DEFAULT_RATE: f64 = 1.0;

const ROW_TOLERANCE: f64 = 1e-9;

/// One profile's transition matrix and interarrival rates.
///
/// `transition` is `(S+1) x (S+1)`: rows are the real states followed by
/// `LC`, columns the real states followed by `RC`. `rates` is `S x S` in
/// events per month.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ParamsRepr", into = "ParamsRepr")]
pub struct MrpParams {
    n_states: usize,
    transition: Vec<f64>,
    rates: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ParamsRepr {
    transition: Vec<Vec<f64>>,
    rates: Vec<Vec<f64>>,
}

impl TryFrom<ParamsRepr> for MrpParams {
    type Error = Error;

    fn try_from(r: ParamsRepr) -> Result<Self> {
        MrpParams::new(r.transition, r.rates)
    }
}

impl From<MrpParams> for ParamsRepr {
    fn from(p: MrpParams) -> Self {
        ParamsRepr {
            transition: p.transition_rows(),
            rates: p.rate_rows(),
        }
    }
}

impl MrpParams {
    /// Validates and builds parameters from row-major nested vectors.
    pub fn new(transition: Vec<Vec<f64>>, rates: Vec<Vec<f64>>) -> Result<Self> {
        let s = rates.len();
        if s == 0 {
            return Err(Error::InvalidParams("no states".into()));
        }
        if transition.len() != s + 1 || transition.iter().any(|r| r.len() != s + 1) {
            return Err(Error::InvalidParams(format!(
                "transition matrix must be {0}x{0}",
                s + 1
            )));
        }
        if rates.iter().any(|r| r.len() != s) {
            return Err(Error::InvalidParams(format!("rate matrix must be {s}x{s}")));
        }
        let params = Self {
            n_states: s,
            transition: transition.into_iter().flatten().collect(),
            rates: rates.into_iter().flatten().collect(),
        };
        params.validate()?;
        Ok(params)
    }

    fn validate(&self) -> Result<()> {
        let s = self.n_states;
        for i in 0..=s {
            let row = self.row(i);
            if row.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
                return Err(Error::InvalidParams(format!("row {i} has entries outside [0,1]")));
            }
            let total: f64 = row.iter().sum();
            if (total - 1.0).abs() > ROW_TOLERANCE {
                return Err(Error::InvalidParams(format!("row {i} sums to {total}")));
            }
        }
        if self.p(s, s) != 0.0 {
            return Err(Error::InvalidParams("LC -> RC must be zero".into()));
        }
        if self.rates.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
            return Err(Error::InvalidParams("rates must be positive and finite".into()));
        }
        Ok(())
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    /// Transition probability; `i == S` is `LC`, `j == S` is `RC`.
    pub fn p(&self, i: usize, j: usize) -> f64 {
        self.transition[i * (self.n_states + 1) + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let w = self.n_states + 1;
        &self.transition[i * w..(i + 1) * w]
    }

    pub fn rate(&self, i: usize, j: usize) -> f64 {
        self.rates[i * self.n_states + j]
    }

    pub fn mean_interarrival(&self, i: usize, j: usize) -> f64 {
        1.0 / self.rate(i, j)
    }

    pub fn transition_rows(&self) -> Vec<Vec<f64>> {
        (0..=self.n_states).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn rate_rows(&self) -> Vec<Vec<f64>> {
        self.rates
            .chunks(self.n_states)
            .map(<[f64]>::to_vec)
            .collect()
    }

    /// Initial-state distribution (the `LC` row without the `RC` cell).
    pub fn initial(&self) -> &[f64] {
        &self.row(self.n_states)[..self.n_states]
    }
}

/// Knobs of the estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EstimationConfig {
    /// Additive pseudo-count per allowed destination of every row.
    pub smoothing: f64,
    /// Clamp for rates, including simultaneous-event cells.
    pub rate_max: f64,
}

impl Default for EstimationConfig {
    fn default() -> Self {
        Self {
            smoothing: 0.5,
            rate_max: RATE_MAX,
        }
    }
}

/// Smoothed maximum-likelihood parameters from sufficient statistics.
///
/// Transition rows use `(n_ij + a) / (n_i + a * d)` where `d` is the number
/// of allowed destinations (`S + 1` for real rows, `S` for `LC`). Rates are
/// the reciprocal mean retained interarrival; cells without observations
/// take the fallback's rate, or the pooled rate of `stats` when there is no
/// fallback.
pub fn estimate_mle(
    stats: &SufficientStats,
    fallback: Option<&MrpParams>,
    cfg: &EstimationConfig,
) -> MrpParams {
    let s = stats.n_states();
    let alpha = cfg.smoothing.max(0.0);
    let mut transition = Vec::with_capacity((s + 1) * (s + 1));
    for i in 0..=s {
        let counts = stats.row(i);
        let allowed = if i == s { s } else { s + 1 };
        let denom = stats.row_total(i) as f64 + alpha * allowed as f64;
        if denom > 0.0 {
            transition.extend(counts.iter().enumerate().map(|(j, &c)| {
                if i == s && j == s {
                    0.0
                } else {
                    (c as f64 + alpha) / denom
                }
            }));
        } else if let Some(fb) = fallback {
            transition.extend_from_slice(fb.row(i));
        } else {
            transition.extend((0..=s).map(|j| {
                if i == s && j == s {
                    0.0
                } else {
                    1.0 / allowed as f64
                }
            }));
        }
    }

    let (pooled_n, pooled_sum) = (stats.total_tau_count(), stats.total_tau_sum());
    let pooled = if pooled_n > 0 && pooled_sum > 0.0 {
        (pooled_n as f64 / pooled_sum).min(cfg.rate_max)
    } else {
        DEFAULT_RATE
    };
    let mut rates = Vec::with_capacity(s * s);
    let mut clamped = 0usize;
    for i in 0..s {
        for j in 0..s {
            let (n, sum) = (stats.tau_count(i, j), stats.tau_sum(i, j));
            let rate = if n == 0 {
                fallback.map_or(pooled, |fb| fb.rate(i, j))
            } else if sum > 0.0 {
                (n as f64 / sum).min(cfg.rate_max)
            } else {
                clamped += 1;
                cfg.rate_max
            };
            rates.push(rate);
        }
    }
    if clamped > 0 {
        log::warn!(
            "{clamped} interarrival cell(s) have only simultaneous events; rate clamped to {}",
            cfg.rate_max
        );
    }

    MrpParams {
        n_states: s,
        transition,
        rates,
    }
}
