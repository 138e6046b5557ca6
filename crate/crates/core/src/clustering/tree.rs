use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::{
    em_refine, fit_null, rank_by_kl, search_split, BicContext, ClusterConfig, EmOutcome,
    ProfileModel, SplitCandidate,
};
use crate::model::{bic_score, Corpus};
use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct Leaf {
    pub id: usize,
    pub parent: Option<usize>,
    pub model: ProfileModel,
}

/// One row of the split log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitRecord {
    pub attempt: usize,
    pub leaf_id: usize,
    pub leaf_size: usize,
    pub n_profiles_before: usize,
    pub bic_0: f64,
    /// Best pre-EM candidate BIC, if any candidate was admissible.
    pub best_bic_a: Option<f64>,
    pub threshold_rank: Option<usize>,
    /// BIC after EM refinement.
    pub bic_a_star: Option<f64>,
    pub em_iterations: usize,
    pub accepted: bool,
    pub children: Option<[usize; 2]>,
    pub child_sizes: Option<[usize; 2]>,
}

/// Result of scoring one leaf for a split.
#[derive(Debug, Clone)]
pub struct SplitAttempt {
    pub bic_0: f64,
    pub candidate: Option<SplitCandidate>,
    pub refined: Option<EmOutcome>,
}

impl SplitAttempt {
    pub fn accepted(&self) -> bool {
        self.refined.as_ref().is_some_and(|r| r.bic > self.bic_0)
    }
}

/// Ranks, searches and refines a split of `leaf` without modifying anything.
pub fn try_split(
    leaf: &ProfileModel,
    corpus: &Corpus,
    ctx: &BicContext,
    cfg: &ClusterConfig,
) -> SplitAttempt {
    let bic_0 = ctx.bic();
    let min_leaf = cfg.min_leaf_for(ctx.n_subjects);
    if leaf.size() < 2 * min_leaf {
        return SplitAttempt {
            bic_0,
            candidate: None,
            refined: None,
        };
    }
    let ranked = rank_by_kl(leaf, corpus, cfg);
    let candidate = search_split(leaf, corpus, &ranked, ctx, cfg);
    let refined = candidate
        .as_ref()
        .map(|c| em_refine(leaf, c.below.clone(), c.above.clone(), corpus, ctx, cfg));
    SplitAttempt {
        bic_0,
        candidate,
        refined,
    }
}

/// State of the divisive search: current leaves, split log and score.
#[derive(Debug, Clone)]
pub struct ClusterTree {
    pub leaves: Vec<Leaf>,
    pub history: Vec<SplitRecord>,
    pub global_bic: f64,
    pub total_loglik: f64,
    pub n_subjects: usize,
    pub n_states: usize,
    pub rng_seed: u64,
    pub config: ClusterConfig,
}

impl ClusterTree {
    pub fn n_profiles(&self) -> usize {
        self.leaves.len()
    }

    pub fn context(&self) -> BicContext {
        BicContext {
            total_loglik: self.total_loglik,
            n_profiles: self.leaves.len(),
            n_subjects: self.n_subjects,
            n_states: self.n_states,
        }
    }

    /// Leaf positions in reporting order: descending size, then leaf id.
    pub fn report_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.leaves.len()).collect();
        order.sort_by(|&a, &b| {
            let (la, lb) = (&self.leaves[a], &self.leaves[b]);
            lb.model
                .size()
                .cmp(&la.model.size())
                .then(la.id.cmp(&lb.id))
        });
        order
    }

    /// Leaf position (in `self.leaves`) of every corpus index.
    pub fn assignments(&self) -> Vec<usize> {
        let mut out = vec![usize::MAX; self.n_subjects];
        for (k, leaf) in self.leaves.iter().enumerate() {
            for &m in &leaf.model.members {
                out[m] = k;
            }
        }
        out
    }

    /// True if every subject belongs to exactly one leaf.
    pub fn is_partition(&self) -> bool {
        let mut seen = vec![false; self.n_subjects];
        for leaf in &self.leaves {
            for &m in &leaf.model.members {
                if m >= self.n_subjects || seen[m] {
                    return false;
                }
                seen[m] = true;
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Re-runs the split search on every leaf; true if none would split.
    pub fn is_stable(&self, corpus: &Corpus) -> bool {
        let ctx = self.context();
        self.leaves
            .iter()
            .all(|leaf| !try_split(&leaf.model, corpus, &ctx, &self.config).accepted())
    }
}

/// Runs the divisive search to completion.
///
/// Leaves are processed first-in first-out. A split is accepted iff the
/// refined global BIC beats the current one; accepted children are queued.
/// Stops when the queue is empty or `max_profiles` is reached. The search
/// itself is deterministic; `seed` is recorded for provenance.
pub fn divisive_cluster(corpus: &Corpus, cfg: &ClusterConfig, seed: u64) -> Result<ClusterTree> {
    cfg.validate()?;
    let root = fit_null(corpus, cfg)?;
    let n_states = corpus.space().len();
    let n_subjects = corpus.len();
    let mut tree = ClusterTree {
        global_bic: bic_score(root.loglik, 1, n_states, n_subjects),
        total_loglik: root.loglik,
        leaves: vec![Leaf {
            id: 0,
            parent: None,
            model: root,
        }],
        history: Vec::new(),
        n_subjects,
        n_states,
        rng_seed: seed,
        config: cfg.clone(),
    };
    log::info!(
        "null fit: {} subjects, loglik {:.4}, BIC_0 {:.4}",
        n_subjects,
        tree.total_loglik,
        tree.global_bic
    );

    let mut queue = VecDeque::from([0usize]);
    let mut next_id = 1;
    while let Some(leaf_id) = queue.pop_front() {
        if tree.leaves.len() >= cfg.max_profiles {
            log::info!("reached max_profiles = {}", cfg.max_profiles);
            break;
        }
        let pos = tree
            .leaves
            .iter()
            .position(|l| l.id == leaf_id)
            .expect("queued leaf exists");
        let ctx = tree.context();
        let attempt = try_split(&tree.leaves[pos].model, corpus, &ctx, cfg);
        let accepted = attempt.accepted();
        let mut record = SplitRecord {
            attempt: tree.history.len() + 1,
            leaf_id,
            leaf_size: tree.leaves[pos].model.size(),
            n_profiles_before: tree.leaves.len(),
            bic_0: attempt.bic_0,
            best_bic_a: attempt.candidate.as_ref().map(|c| c.bic_alternative),
            threshold_rank: attempt.candidate.as_ref().map(|c| c.threshold_rank),
            bic_a_star: attempt.refined.as_ref().map(|r| r.bic),
            em_iterations: attempt.refined.as_ref().map_or(0, |r| r.iterations),
            accepted,
            children: None,
            child_sizes: None,
        };
        log::info!(
            "split attempt {}: leaf {} (n={}) BIC_0 {:.4} BIC_A* {} accepted={}",
            record.attempt,
            leaf_id,
            record.leaf_size,
            record.bic_0,
            record
                .bic_a_star
                .map_or_else(|| "-".to_string(), |b| format!("{b:.4}")),
            accepted
        );

        if accepted {
            let refined = attempt.refined.expect("accepted split has a refinement");
            let parent = tree.leaves.remove(pos);
            let [a, b] = refined.children;
            let ids = [next_id, next_id + 1];
            next_id += 2;
            record.children = Some(ids);
            record.child_sizes = Some([a.size(), b.size()]);
            // Same operation order as `bic_after_split`, so the next BIC_0
            // equals this BIC_A* bit for bit.
            tree.total_loglik = tree.total_loglik - parent.model.loglik + (a.loglik + b.loglik);
            tree.leaves.push(Leaf {
                id: ids[0],
                parent: Some(leaf_id),
                model: a,
            });
            tree.leaves.push(Leaf {
                id: ids[1],
                parent: Some(leaf_id),
                model: b,
            });
            tree.global_bic = refined.bic;
            debug_assert!(tree.is_partition());
            queue.extend(ids);
        }
        tree.history.push(record);
    }
    Ok(tree)
}
