use super::ClusterConfig;
use crate::model::stats::accumulate_indexed;
use crate::model::{estimate_mle, Corpus, LogParams, MrpParams, SufficientStats};
use crate::{Error, Result};

/// A fitted profile: parameters, the statistics they were estimated from,
/// the member indices (ascending, into the corpus) and the members' total
/// censoring-adjusted log-likelihood.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileModel {
    pub params: MrpParams,
    pub stats: SufficientStats,
    pub members: Vec<usize>,
    pub loglik: f64,
}

impl ProfileModel {
    /// Fits a profile to `members`; empty cells fall back to `fallback`.
    pub fn fit(
        corpus: &Corpus,
        members: Vec<usize>,
        fallback: Option<&MrpParams>,
        cfg: &ClusterConfig,
    ) -> Self {
        let stats = accumulate_indexed(corpus.seqs(), &members, corpus.space().len());
        Self::from_stats(stats, members, fallback, cfg)
    }

    pub(crate) fn from_stats(
        stats: SufficientStats,
        members: Vec<usize>,
        fallback: Option<&MrpParams>,
        cfg: &ClusterConfig,
    ) -> Self {
        let params = estimate_mle(&stats, fallback, &cfg.estimation);
        let loglik = LogParams::new(&params, cfg.prob_floor).score_stats(&stats);
        Self {
            params,
            stats,
            members,
            loglik,
        }
    }

    pub fn size(&self) -> usize {
        self.members.len()
    }

    pub fn member_ids<'a>(&self, corpus: &'a Corpus) -> Vec<&'a str> {
        self.members
            .iter()
            .map(|&m| corpus.get(m).subject_id())
            .collect()
    }
}

/// The single-profile null model over the whole corpus.
pub fn fit_null(corpus: &Corpus, cfg: &ClusterConfig) -> Result<ProfileModel> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    Ok(ProfileModel::fit(corpus, (0..corpus.len()).collect(), None, cfg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{sequence_log_likelihood, EventSequence, StateSpace};

    #[test]
    fn single_sequence_null_fit() {
        let sp = StateSpace::new(["A", "B"]).unwrap();
        let seq = EventSequence::from_labels(
            "x",
            [("A", 0.0), ("B", 1.0), ("A", 2.0), ("A", 4.0)],
            &sp,
        )
        .unwrap();
        let corpus = Corpus::new(sp, vec![seq.clone()]).unwrap();
        let m = fit_null(&corpus, &ClusterConfig::default()).unwrap();
        assert_eq!(m.size(), 1);
        assert!((m.loglik - sequence_log_likelihood(&seq, &m.params)).abs() < 1e-12);
    }

    #[test]
    fn empty_corpus_is_an_error() {
        let corpus = Corpus::new(StateSpace::new(["A"]).unwrap(), vec![]).unwrap();
        assert!(matches!(
            fit_null(&corpus, &ClusterConfig::default()),
            Err(Error::EmptyCorpus)
        ));
    }
}
