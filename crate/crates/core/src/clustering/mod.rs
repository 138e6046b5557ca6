//! Divisive, KL-guided clustering of sequences into MRP profiles.
//!
//! Starting from a single profile, every leaf is scored for a two-way split:
//! members are ranked by the average KL distance of their own transition
//! distributions from the leaf's, a fixed number of rank thresholds are tried
//! as partitions, the best one by global BIC seeds a hard (classification)
//! EM, and the refined split is accepted only if it raises the global BIC.
//! Accepted children are queued and the search repeats until no leaf splits.

mod config;
mod em;
mod profile;
mod split;
mod tree;

pub use config::ClusterConfig;
pub use em::{em_refine, EmOutcome, EmStop};
pub use profile::{fit_null, ProfileModel};
pub use split::{kl_distances, rank_by_kl, search_split, sort_ranked, threshold_positions, BicContext, RankedSubject, SplitCandidate};
pub use tree::{divisive_cluster, try_split, ClusterTree, Leaf, SplitAttempt, SplitRecord};
