use rayon::prelude::*;

use super::stats::FOLD_CHUNK;
use super::{EventSequence, MrpParams, SufficientStats};

/// Probabilities are floored at this value before taking logs, so foreign
/// sequences never score `-inf`.
pub const PROB_FLOOR: f64 = 1e-9;

/// Log-space view of [`MrpParams`], precomputed once per scoring pass.
#[derive(Debug, Clone)]
pub struct LogParams {
    n_states: usize,
    log_p: Vec<f64>,
    rate: Vec<f64>,
    log_rate: Vec<f64>,
}

impl LogParams {
    pub fn new(params: &MrpParams, floor: f64) -> Self {
        let s = params.n_states();
        let mut log_p = Vec::with_capacity((s + 1) * (s + 1));
        for i in 0..=s {
            log_p.extend(params.row(i).iter().map(|&p| p.max(floor).ln()));
        }
        let rate: Vec<f64> = (0..s)
            .flat_map(|i| (0..s).map(move |j| (i, j)))
            .map(|(i, j)| params.rate(i, j))
            .collect();
        let log_rate = rate.iter().map(|r| r.ln()).collect();
        Self {
            n_states: s,
            log_p,
            rate,
            log_rate,
        }
    }

    #[inline]
    fn log_p(&self, i: usize, j: usize) -> f64 {
        self.log_p[i * (self.n_states + 1) + j]
    }

    /// Censoring-adjusted log-likelihood of one sequence.
    pub fn score(&self, seq: &EventSequence) -> f64 {
        let s = self.n_states;
        let mut ll = self.log_p(s, seq.first());
        for (i, j) in seq.transitions() {
            ll += self.log_p(i, j);
        }
        ll += self.log_p(seq.last(), s);
        for (i, j, tau) in seq.retained_interarrivals() {
            let k = i * s + j;
            ll += self.log_rate[k] - self.rate[k] * tau;
        }
        ll
    }

    /// Log-likelihood of everything summarised in `stats`; equals the sum
    /// of [`LogParams::score`] over the summarised sequences.
    pub fn score_stats(&self, stats: &SufficientStats) -> f64 {
        let s = self.n_states;
        let mut ll = 0.0;
        for j in 0..s {
            let n = stats.init(j);
            if n > 0 {
                ll += n as f64 * self.log_p(s, j);
            }
        }
        for i in 0..s {
            for j in 0..=s {
                let n = stats.trans(i, j);
                if n > 0 {
                    ll += n as f64 * self.log_p(i, j);
                }
            }
            for j in 0..s {
                let n = stats.tau_count(i, j);
                if n > 0 {
                    let k = i * s + j;
                    ll += n as f64 * self.log_rate[k] - self.rate[k] * stats.tau_sum(i, j);
                }
            }
        }
        ll
    }

    /// Log-prior of the additive smoothing: `a * sum log p` over allowed
    /// cells. Smoothed estimates maximise `score_stats + log_prior`.
    pub(crate) fn log_prior(&self, smoothing: f64) -> f64 {
        if smoothing == 0.0 {
            return 0.0;
        }
        let s = self.n_states;
        let mut total = 0.0;
        for i in 0..=s {
            for j in 0..=s {
                if !(i == s && j == s) {
                    total += self.log_p(i, j);
                }
            }
        }
        smoothing * total
    }
}

/// Censoring-adjusted log-likelihood of one sequence under `params`.
pub fn sequence_log_likelihood(seq: &EventSequence, params: &MrpParams) -> f64 {
    LogParams::new(params, PROB_FLOOR).score(seq)
}

/// Sum of [`sequence_log_likelihood`] over `seqs`, as a deterministic
/// chunked parallel fold.
pub fn batch_log_likelihood(seqs: &[EventSequence], params: &MrpParams) -> f64 {
    let lp = LogParams::new(params, PROB_FLOOR);
    let partials: Vec<f64> = seqs
        .par_chunks(FOLD_CHUNK)
        .map(|chunk| chunk.iter().map(|s| lp.score(s)).sum())
        .collect();
    partials.iter().sum()
}

/// Log-likelihood computed from sufficient statistics alone.
pub fn stats_log_likelihood(stats: &SufficientStats, params: &MrpParams) -> f64 {
    LogParams::new(params, PROB_FLOOR).score_stats(stats)
}

/// Maximum-posterior profile under equal priors. Ties go to the lowest
/// index. Returns the chosen index and every profile's log-likelihood.
pub fn posterior_assign(seq: &EventSequence, profiles: &[MrpParams]) -> (usize, Vec<f64>) {
    assert!(!profiles.is_empty(), "posterior_assign needs at least one profile");
    let lls: Vec<f64> = profiles
        .iter()
        .map(|p| sequence_log_likelihood(seq, p))
        .collect();
    (argmax_first(&lls), lls)
}

pub(crate) fn argmax_first(values: &[f64]) -> usize {
    let mut best = 0;
    for (k, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = k;
        }
    }
    best
}
