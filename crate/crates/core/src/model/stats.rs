use std::ops::{Add, AddAssign};

use rayon::prelude::*;

use super::{EventSequence, StateSpace};
use crate::{Error, Result};

/// Sequences per work unit in parallel folds. Partial results are merged in
/// chunk order so the outcome does not depend on the thread count.
pub(crate) const FOLD_CHUNK: usize = 1024;

/// Counting statistics of a set of sequences.
///
/// `trans` is `S x (S+1)` (last column is `RC`), `init` counts first events
/// (the `LC` row), and the interarrival sums cover retained transitions only.
#[derive(Debug, Clone, PartialEq)]
pub struct SufficientStats {
    pub(crate) n_states: usize,
    pub(crate) trans: Vec<u64>,
    pub(crate) init: Vec<u64>,
    pub(crate) tau_sum: Vec<f64>,
    pub(crate) tau_count: Vec<u64>,
    pub(crate) n_seq: u64,
}

impl SufficientStats {
    pub fn zeros(n_states: usize) -> Self {
        Self {
            n_states,
            trans: vec![0; n_states * (n_states + 1)],
            init: vec![0; n_states],
            tau_sum: vec![0.0; n_states * n_states],
            tau_count: vec![0; n_states * n_states],
            n_seq: 0,
        }
    }

    /// Stats of one sequence. The caller guarantees indices are `< n_states`.
    pub fn from_sequence(seq: &EventSequence, n_states: usize) -> Self {
        let mut stats = Self::zeros(n_states);
        stats.add_sequence(seq);
        stats
    }

    pub fn add_sequence(&mut self, seq: &EventSequence) {
        let s = self.n_states;
        self.n_seq += 1;
        self.init[seq.first()] += 1;
        for (i, j) in seq.transitions() {
            self.trans[i * (s + 1) + j] += 1;
        }
        self.trans[seq.last() * (s + 1) + s] += 1;
        for (i, j, tau) in seq.retained_interarrivals() {
            self.tau_sum[i * s + j] += tau;
            self.tau_count[i * s + j] += 1;
        }
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_seq(&self) -> u64 {
        self.n_seq
    }

    /// Count of `i -> j`; `j == S` is `i -> RC`.
    pub fn trans(&self, i: usize, j: usize) -> u64 {
        self.trans[i * (self.n_states + 1) + j]
    }

    /// Count of sequences starting in `j` (`LC -> j`).
    pub fn init(&self, j: usize) -> u64 {
        self.init[j]
    }

    /// Row count of a transition-matrix row; row `S` is `LC`.
    pub fn row(&self, i: usize) -> Vec<u64> {
        let s = self.n_states;
        if i == s {
            let mut row = self.init.clone();
            row.push(0);
            row
        } else {
            self.trans[i * (s + 1)..(i + 1) * (s + 1)].to_vec()
        }
    }

    pub fn row_total(&self, i: usize) -> u64 {
        if i == self.n_states {
            self.n_seq
        } else {
            let s = self.n_states;
            self.trans[i * (s + 1)..(i + 1) * (s + 1)].iter().sum()
        }
    }

    pub fn tau_sum(&self, i: usize, j: usize) -> f64 {
        self.tau_sum[i * self.n_states + j]
    }

    pub fn tau_count(&self, i: usize, j: usize) -> u64 {
        self.tau_count[i * self.n_states + j]
    }

    pub fn total_tau_sum(&self) -> f64 {
        self.tau_sum.iter().sum()
    }

    pub fn total_tau_count(&self) -> u64 {
        self.tau_count.iter().sum()
    }

    /// Visits per real state: transitions into `j` from `LC` or any real state.
    pub fn visits(&self, j: usize) -> u64 {
        let s = self.n_states;
        self.init[j] + (0..s).map(|i| self.trans(i, j)).sum::<u64>()
    }

    /// Total number of events (= sum of sequence lengths).
    pub fn total_events(&self) -> u64 {
        (0..self.n_states).map(|j| self.visits(j)).sum()
    }

    /// Real states with at least one outgoing transition (to RC included).
    pub fn exited_states(&self) -> Vec<usize> {
        (0..self.n_states)
            .filter(|&i| self.row_total(i) > 0)
            .collect()
    }
}

impl AddAssign<&SufficientStats> for SufficientStats {
    fn add_assign(&mut self, rhs: &SufficientStats) {
        assert_eq!(self.n_states, rhs.n_states, "state spaces differ");
        for (a, b) in self.trans.iter_mut().zip(&rhs.trans) {
            *a += b;
        }
        for (a, b) in self.init.iter_mut().zip(&rhs.init) {
            *a += b;
        }
        for (a, b) in self.tau_sum.iter_mut().zip(&rhs.tau_sum) {
            *a += b;
        }
        for (a, b) in self.tau_count.iter_mut().zip(&rhs.tau_count) {
            *a += b;
        }
        self.n_seq += rhs.n_seq;
    }
}

impl Add for SufficientStats {
    type Output = SufficientStats;

    fn add(mut self, rhs: SufficientStats) -> SufficientStats {
        self += &rhs;
        self
    }
}

fn check_sequence(seq: &EventSequence, space: &StateSpace) -> Result<()> {
    if let Some(&index) = seq.events().iter().find(|&&e| e >= space.len()) {
        return Err(Error::InvalidState {
            subject: seq.subject_id().to_string(),
            index,
            size: space.len(),
        });
    }
    if let Some(p) = seq.times().windows(2).position(|w| w[1] < w[0]) {
        return Err(Error::DecreasingTimes {
            subject: seq.subject_id().to_string(),
            position: p + 1,
        });
    }
    Ok(())
}

/// Accumulates sufficient statistics over `seqs`.
///
/// Runs as a chunked parallel fold; partial sums are combined in input order
/// so repeated runs are bit-identical regardless of thread count.
pub fn accumulate_stats(seqs: &[EventSequence], space: &StateSpace) -> Result<SufficientStats> {
    let s = space.len();
    let partials: Vec<SufficientStats> = seqs
        .par_chunks(FOLD_CHUNK)
        .map(|chunk| {
            let mut stats = SufficientStats::zeros(s);
            for seq in chunk {
                check_sequence(seq, space)?;
                stats.add_sequence(seq);
            }
            Ok(stats)
        })
        .collect::<Result<_>>()?;
    Ok(partials
        .iter()
        .fold(SufficientStats::zeros(s), |mut acc, p| {
            acc += p;
            acc
        }))
}

/// Same fold over a subset of corpus indices.
pub(crate) fn accumulate_indexed(seqs: &[EventSequence], members: &[usize], n_states: usize) -> SufficientStats {
    let partials: Vec<SufficientStats> = members
        .par_chunks(FOLD_CHUNK)
        .map(|chunk| {
            let mut stats = SufficientStats::zeros(n_states);
            for &m in chunk {
                stats.add_sequence(&seqs[m]);
            }
            stats
        })
        .collect();
    partials
        .iter()
        .fold(SufficientStats::zeros(n_states), |mut acc, p| {
            acc += p;
            acc
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space() -> StateSpace {
        StateSpace::provider_types()
    }

    /// The worked utilization example: ER, RX one month later, then PO and RX
    /// at 3-month intervals (times given in years, converted to months).
    fn worked_example(space: &StateSpace) -> EventSequence {
        let years = [
            ("ER", 0.00),
            ("RX", 0.08),
            ("PO", 0.25),
            ("PO", 0.50),
            ("RX", 0.75),
            ("PO", 1.00),
        ];
        EventSequence::from_labels("A", years.iter().map(|&(l, y)| (l, y * 12.0)), space).unwrap()
    }

    #[test]
    fn worked_example_counts() {
        let sp = space();
        let (er, po, rx) = (1, 4, 5);
        let stats = accumulate_stats(&[worked_example(&sp)], &sp).unwrap();
        assert_eq!(stats.trans(er, rx), 1);
        assert_eq!(stats.trans(rx, po), 2);
        assert_eq!(stats.trans(po, po), 1);
        assert_eq!(stats.trans(po, rx), 1);
        assert_eq!(stats.trans(po, 6), 1);
        assert_eq!(stats.init(er), 1);
        assert_eq!(stats.n_seq(), 1);
        assert_eq!(stats.tau_count(er, rx), 0);
        assert_eq!(stats.tau_count(rx, po), 1);
        assert!((stats.tau_sum(rx, po) - 2.04).abs() < 1e-12);
        assert_eq!(stats.tau_count(po, po), 1);
        assert!((stats.tau_sum(po, po) - 3.0).abs() < 1e-12);
        assert_eq!(stats.tau_count(po, rx), 1);
        assert!((stats.tau_sum(po, rx) - 3.0).abs() < 1e-12);
        assert_eq!(stats.total_tau_count(), 3);
    }

    #[test]
    fn single_event() {
        let sp = space();
        let seq = EventSequence::from_labels("x", [("PO", 7.0)], &sp).unwrap();
        let stats = accumulate_stats(&[seq], &sp).unwrap();
        assert_eq!(stats.init(4), 1);
        assert_eq!(stats.trans(4, 6), 1);
        assert_eq!(stats.total_tau_sum(), 0.0);
        assert_eq!(stats.total_events(), 1);
    }

    #[test]
    fn rejects_foreign_state_index() {
        let big = StateSpace::new(["A", "B", "C"]).unwrap();
        let small = StateSpace::new(["A", "B"]).unwrap();
        let seq = EventSequence::new("s9", vec![0, 2], vec![0.0, 1.0], &big).unwrap();
        match accumulate_stats(&[seq], &small) {
            Err(Error::InvalidState { subject, index, .. }) => {
                assert_eq!(subject, "s9");
                assert_eq!(index, 2);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn row_invariants() {
        let sp = space();
        let seqs = vec![
            worked_example(&sp),
            EventSequence::from_labels("b", [("RX", 0.0), ("RX", 1.0)], &sp).unwrap(),
        ];
        let stats = accumulate_stats(&seqs, &sp).unwrap();
        let init: u64 = (0..6).map(|j| stats.init(j)).sum();
        let rc: u64 = (0..6).map(|i| stats.trans(i, 6)).sum();
        assert_eq!(init, stats.n_seq());
        assert_eq!(rc, stats.n_seq());
        assert_eq!(stats.total_events(), 8);
        assert_eq!(stats.row(6).iter().sum::<u64>(), 2);
    }
}
