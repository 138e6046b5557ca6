use rayon::prelude::*;

use super::{BicContext, ClusterConfig, ProfileModel};
use crate::model::{Corpus, LogParams};

/// Why the refinement stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmStop {
    /// Reassignment left every member in place.
    Fixpoint,
    /// Objective improved by less than the tolerance.
    Tolerance,
    /// A child would have lost all members; the last iterate was kept.
    EmptyChild,
    MaxIter,
}

#[derive(Debug, Clone)]
pub struct EmOutcome {
    pub children: [ProfileModel; 2],
    /// Global BIC with the refined children in place of the parent.
    pub bic: f64,
    pub iterations: usize,
    pub stop: EmStop,
    /// Objective after initialisation and after each accepted iteration:
    /// the children's log-likelihood plus the log-prior implied by the
    /// additive smoothing. With zero smoothing this is the log-likelihood.
    pub objective_trace: Vec<f64>,
    /// Children's total log-likelihood at the same points.
    pub loglik_trace: Vec<f64>,
}

/// Classification EM over two children, seeded with `below`/`above`.
///
/// Each iteration reassigns every member to the child under which it is more
/// likely (ties to the first child), then re-estimates both children with
/// the parent's parameters as the fallback for empty cells. Stops at an
/// assignment fixpoint, on an objective gain below `em_tol`, when a child
/// would be emptied (that iteration is discarded), or after `em_max_iter`.
pub fn em_refine(
    parent: &ProfileModel,
    below: Vec<usize>,
    above: Vec<usize>,
    corpus: &Corpus,
    ctx: &BicContext,
    cfg: &ClusterConfig,
) -> EmOutcome {
    assert!(
        !below.is_empty() && !above.is_empty(),
        "EM needs two non-empty sides"
    );
    let fallback = Some(&parent.params);
    let fit = |members: Vec<usize>| ProfileModel::fit(corpus, members, fallback, cfg);
    let objective = |c: &[ProfileModel; 2]| -> f64 {
        c.iter()
            .map(|p| {
                p.loglik + LogParams::new(&p.params, cfg.prob_floor).log_prior(cfg.estimation.smoothing)
            })
            .sum()
    };

    let mut children = [fit(below), fit(above)];
    let mut current = objective(&children);
    let mut objective_trace = vec![current];
    let mut loglik_trace = vec![children[0].loglik + children[1].loglik];
    let mut members = parent.members.clone();
    members.sort_unstable();
    let mut side: Vec<u8> = {
        let first = &children[0].members;
        members
            .iter()
            .map(|m| u8::from(first.binary_search(m).is_err()))
            .collect()
    };

    let mut iterations = 0;
    let mut stop = EmStop::MaxIter;
    while iterations < cfg.em_max_iter {
        iterations += 1;
        let lp = [
            LogParams::new(&children[0].params, cfg.prob_floor),
            LogParams::new(&children[1].params, cfg.prob_floor),
        ];
        let next: Vec<u8> = members
            .par_iter()
            .map(|&m| {
                let seq = corpus.get(m);
                u8::from(lp[1].score(seq) > lp[0].score(seq))
            })
            .collect();
        if next == side {
            stop = EmStop::Fixpoint;
            break;
        }
        let split = |k: u8| -> Vec<usize> {
            members
                .iter()
                .zip(&next)
                .filter(|&(_, &s)| s == k)
                .map(|(&m, _)| m)
                .collect()
        };
        let (first, second) = (split(0), split(1));
        if first.is_empty() || second.is_empty() {
            stop = EmStop::EmptyChild;
            break;
        }
        let candidate = [fit(first), fit(second)];
        let value = objective(&candidate);
        if value < current - 1e-9 * current.abs().max(1.0) {
            log::warn!("EM objective decreased ({current} -> {value}); keeping previous iterate");
            stop = EmStop::Tolerance;
            break;
        }
        let gain = value - current;
        children = candidate;
        side = next;
        current = value;
        objective_trace.push(value);
        loglik_trace.push(children[0].loglik + children[1].loglik);
        if gain < cfg.em_tol {
            stop = EmStop::Tolerance;
            break;
        }
    }

    let bic = ctx.bic_after_split(parent.loglik, children[0].loglik + children[1].loglik);
    EmOutcome {
        children,
        bic,
        iterations,
        stop,
        objective_trace,
        loglik_trace,
    }
}
