/// Free parameters of a `k`-profile model over `s` states.
///
/// Per profile: `S*(S+1) - 1` transition parameters (S real rows over S+1
/// destinations plus the `LC` row over S destinations, minus one
/// normalisation per row) and `S*S` rates.
pub fn model_size(k: usize, s: usize) -> usize {
    k * (s * (s + 1) - 1) + k * s * s
}

/// Penalised log-likelihood; higher is better.
pub fn bic_score(total_loglik: f64, k: usize, s: usize, r: usize) -> f64 {
    total_loglik - model_size(k, s) as f64 * (r as f64).ln() / 2.0
}
