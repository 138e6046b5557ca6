use super::{MrpParams, SufficientStats, PROB_FLOOR};

/// `KL(Exp(a) || Exp(b)) = ln(a/b) + b/a - 1`.
pub fn kl_exponential(rate_a: f64, rate_b: f64) -> f64 {
    debug_assert!(rate_a > 0.0 && rate_b > 0.0);
    (rate_a / rate_b).ln() + rate_b / rate_a - 1.0
}

/// KL divergence between the transition distributions out of real state `i`.
///
/// The transition distribution is a mixture over destinations of
/// exponential holding times, indexed by destination in both models, so the
/// divergence splits per destination into a probability ratio and an
/// exponential KL. The `RC` destination has no holding time. `b` is
/// floored at [`PROB_FLOOR`].
pub fn kl_transition_distribution(i: usize, a: &MrpParams, b: &MrpParams) -> f64 {
    let s = a.n_states();
    assert!(i < s, "KL is defined for real source states only");
    let mut kl = 0.0;
    for j in 0..=s {
        let pa = a.p(i, j);
        if pa <= 0.0 {
            continue;
        }
        let pb = b.p(i, j).max(PROB_FLOOR);
        let mut term = (pa / pb).ln();
        if j < s {
            term += kl_exponential(a.rate(i, j), b.rate(i, j));
        }
        kl += pa * term;
    }
    kl
}

/// Real states a sequence actually leaves (including to `RC`).
pub fn active_states(stats: &SufficientStats) -> Vec<usize> {
    stats.exited_states()
}

/// Mean KL over `active` states between a sequence's own parameters and a
/// profile's; zero when `active` is empty.
pub fn average_kl(seq_params: &MrpParams, profile_params: &MrpParams, active: &[usize]) -> f64 {
    if active.is_empty() {
        return 0.0;
    }
    let total: f64 = active
        .iter()
        .map(|&i| kl_transition_distribution(i, seq_params, profile_params))
        .sum();
    total / active.len() as f64
}
