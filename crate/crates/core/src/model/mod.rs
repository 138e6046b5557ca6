//! The Markov renewal process core.
//!
//! Index conventions used throughout: real states are `0..S`. Transition
//! matrices are `(S+1) x (S+1)`; row `S` is the left-censor source `LC` and
//! column `S` is the right-censor destination `RC`. `LC -> RC` is disallowed
//! and rates are defined only on the real `S x S` block.

mod bic;
mod kl;
mod likelihood;
mod params;
mod sequence;
mod state;
pub(crate) mod stats;

pub use bic::{bic_score, model_size};
pub use kl::{active_states, average_kl, kl_exponential, kl_transition_distribution};
pub use likelihood::{
    batch_log_likelihood, posterior_assign, sequence_log_likelihood, stats_log_likelihood,
    LogParams, PROB_FLOOR,
};
pub use params::{estimate_mle, EstimationConfig, MrpParams, DEFAULT_RATE, RATE_MAX};
pub use sequence::{Corpus, EventSequence};
pub use state::{StateSpace, LC_LABEL, RC_LABEL};
pub use stats::{accumulate_stats, SufficientStats};

/// Days per month used for every day/month conversion.
pub const DAYS_PER_MONTH: f64 = 30.4375;
