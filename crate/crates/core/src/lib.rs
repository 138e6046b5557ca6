//! Clustering of timestamped discrete-event sequences into latent profiles.
//!
//! Each profile is a Markov renewal process: the event sequence is a
//! discrete-time Markov chain over a small alphabet and the time between two
//! consecutive events is exponential with a rate that depends on the
//! (source, destination) pair. Study-window censoring is handled with two
//! virtual states, `LC` (entry) and `RC` (exit), and the first and last
//! interarrival time of every sequence are left out of estimation.
//!
//! The crate is organised as:
//!
//! - [`model`]: sufficient statistics, estimation, likelihoods, BIC and KL.
//! - [`clustering`]: the divisive KL-guided split search with hard-EM
//!   refinement and BIC-gated acceptance.
//! - [`ingest`]: claim records to sequences, file formats and synthetic data.
//! - [`netviz`]: pruned provider networks, DOT output and visit volumes.
//! - [`report`]: the versioned JSON fit report.
//! - [`bench`]: the runtime-versus-corpus-size harness.

pub mod bench;
pub mod clustering;
pub mod designs;
mod error;
pub mod ingest;
pub mod model;
pub mod netviz;
pub mod report;

pub use error::{Error, Result};
