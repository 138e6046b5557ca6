use rayon::prelude::*;

use super::{ClusterConfig, ProfileModel};
use crate::model::{active_states, average_kl, bic_score, estimate_mle, Corpus, SufficientStats};

/// Global quantities needed to turn a local split into a whole-model BIC.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BicContext {
    /// Current total log-likelihood over all leaves.
    pub total_loglik: f64,
    /// Current number of profiles.
    pub n_profiles: usize,
    pub n_subjects: usize,
    pub n_states: usize,
}

impl BicContext {
    pub fn bic(&self) -> f64 {
        bic_score(self.total_loglik, self.n_profiles, self.n_states, self.n_subjects)
    }

    /// Global BIC after replacing a leaf of log-likelihood `parent` with two
    /// children scoring `children`.
    pub fn bic_after_split(&self, parent: f64, children: f64) -> f64 {
        bic_score(
            self.total_loglik - parent + children,
            self.n_profiles + 1,
            self.n_states,
            self.n_subjects,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankedSubject {
    /// Corpus index.
    pub index: usize,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitCandidate {
    /// 1-based index of the threshold among the equally spaced ranks.
    pub threshold_rank: usize,
    pub threshold: f64,
    /// Members with distance below the threshold (ascending corpus index).
    pub below: Vec<usize>,
    /// Members at or above the threshold (ascending corpus index).
    pub above: Vec<usize>,
    /// Global BIC if this split were adopted without refinement.
    pub bic_alternative: f64,
    /// Number of distinct thresholds that were evaluated.
    pub evaluated: usize,
}

/// Members of `profile` in ascending order of average KL distance between
/// their own smoothed MLE and the profile's parameters. Ties are broken by
/// corpus index, i.e. by subject id.
pub fn rank_by_kl(profile: &ProfileModel, corpus: &Corpus, cfg: &ClusterConfig) -> Vec<RankedSubject> {
    let mut ranked = kl_distances(profile, corpus, cfg);
    sort_ranked(&mut ranked);
    ranked
}

/// Average KL distance of every member to `profile`, in member order.
pub fn kl_distances(profile: &ProfileModel, corpus: &Corpus, cfg: &ClusterConfig) -> Vec<RankedSubject> {
    let s = corpus.space().len();
    profile
        .members
        .par_iter()
        .map(|&index| {
            let stats = SufficientStats::from_sequence(corpus.get(index), s);
            let own = estimate_mle(&stats, Some(&profile.params), &cfg.estimation);
            let distance = average_kl(&own, &profile.params, &active_states(&stats));
            RankedSubject { index, distance }
        })
        .collect()
}

/// Sorts by ascending distance, then corpus index.
pub fn sort_ranked(ranked: &mut [RankedSubject]) {
    ranked.sort_by(|a, b| {
        a.distance
            .total_cmp(&b.distance)
            .then(a.index.cmp(&b.index))
    });
}

/// Distinct split positions for `n_thresholds` equally spaced order
/// statistics of ascending `distances`.
///
/// Threshold `i` (1-based) is the distance at rank `floor((i - 1) * m / n)`,
/// so the grid starts at the minimum and steps by `m / n` ranks; for even `n`
/// it contains the median. The first threshold leaves one side empty and is
/// always discarded by the `min_leaf` check. The partition puts every member strictly below the threshold value on one
/// side, so the returned position is the lower bound of that value. Repeated
/// values are evaluated once. Returns `(threshold_rank, threshold, position)`.
pub fn threshold_positions(distances: &[f64], n_thresholds: usize) -> Vec<(usize, f64, usize)> {
    let m = distances.len();
    let mut out: Vec<(usize, f64, usize)> = Vec::new();
    for i in 1..=n_thresholds {
        let rank = (i - 1) * m / n_thresholds;
        if rank >= m {
            continue;
        }
        let t = distances[rank];
        if out.last().is_some_and(|&(_, prev, _)| prev == t) {
            continue;
        }
        let pos = distances.partition_point(|&d| d < t);
        out.push((i, t, pos));
    }
    out
}

/// Best two-way partition of `profile` over the threshold grid, by global
/// BIC. `None` when the profile is too small or no threshold leaves at least
/// `min_leaf` members on each side.
pub fn search_split(
    profile: &ProfileModel,
    corpus: &Corpus,
    ranked: &[RankedSubject],
    ctx: &BicContext,
    cfg: &ClusterConfig,
) -> Option<SplitCandidate> {
    let m = ranked.len();
    let min_leaf = cfg.min_leaf_for(ctx.n_subjects);
    if m < 2 * min_leaf {
        return None;
    }
    let distances: Vec<f64> = ranked.iter().map(|r| r.distance).collect();
    let all = threshold_positions(&distances, cfg.n_thresholds);
    let evaluated = all.len();
    let grid: Vec<_> = all
        .into_iter()
        .filter(|&(_, _, pos)| pos >= min_leaf && m - pos >= min_leaf)
        .collect();
    if grid.is_empty() {
        return None;
    }

    let s = corpus.space().len();
    let positions: Vec<usize> = grid.iter().map(|&(_, _, p)| p).collect();
    let below = prefix_stats(corpus, ranked.iter(), &positions, s);
    let suffix_positions: Vec<usize> = positions.iter().rev().map(|&p| m - p).collect();
    let mut above = prefix_stats(corpus, ranked.iter().rev(), &suffix_positions, s);
    above.reverse();

    let scores: Vec<f64> = below
        .into_par_iter()
        .zip(above)
        .map(|(lo, hi)| {
            let lo = ProfileModel::from_stats(lo, Vec::new(), Some(&profile.params), cfg);
            let hi = ProfileModel::from_stats(hi, Vec::new(), Some(&profile.params), cfg);
            ctx.bic_after_split(profile.loglik, lo.loglik + hi.loglik)
        })
        .collect();

    let mut best = 0;
    for (k, &score) in scores.iter().enumerate().skip(1) {
        if score > scores[best] {
            best = k;
        }
    }
    let (threshold_rank, threshold, pos) = grid[best];
    let mut lower: Vec<usize> = ranked[..pos].iter().map(|r| r.index).collect();
    let mut upper: Vec<usize> = ranked[pos..].iter().map(|r| r.index).collect();
    lower.sort_unstable();
    upper.sort_unstable();
    Some(SplitCandidate {
        threshold_rank,
        threshold,
        below: lower,
        above: upper,
        bic_alternative: scores[best],
        evaluated,
    })
}

/// Running statistics over `order`, snapshotted after the first `p` items
/// for every `p` in ascending `positions`.
fn prefix_stats<'a>(
    corpus: &Corpus,
    order: impl Iterator<Item = &'a RankedSubject>,
    positions: &[usize],
    n_states: usize,
) -> Vec<SufficientStats> {
    let mut out = Vec::with_capacity(positions.len());
    let mut acc = SufficientStats::zeros(n_states);
    let mut next = positions.iter().peekable();
    for (taken, r) in order.enumerate() {
        while next.peek().is_some_and(|&&p| p == taken) {
            out.push(acc.clone());
            next.next();
        }
        if next.peek().is_none() {
            break;
        }
        acc.add_sequence(corpus.get(r.index));
    }
    for _ in next {
        out.push(acc.clone());
    }
    out
}
