use std::collections::HashMap;

use super::StateSpace;
use crate::{Error, Result};

/// Ordered `(event, arrival time)` pairs for one subject. Times are in
/// fractional months and nondecreasing.
#[derive(Debug, Clone, PartialEq)]
pub struct EventSequence {
    subject_id: String,
    events: Vec<usize>,
    times: Vec<f64>,
}

impl EventSequence {
    pub fn new(
        subject_id: impl Into<String>,
        events: Vec<usize>,
        times: Vec<f64>,
        space: &StateSpace,
    ) -> Result<Self> {
        let subject_id = subject_id.into();
        if events.is_empty() {
            return Err(Error::InvalidSequence {
                subject: subject_id,
                reason: "sequence has no events".into(),
            });
        }
        if events.len() != times.len() {
            return Err(Error::InvalidSequence {
                subject: subject_id,
                reason: format!("{} events but {} times", events.len(), times.len()),
            });
        }
        if let Some(&index) = events.iter().find(|&&e| e >= space.len()) {
            return Err(Error::InvalidState {
                subject: subject_id,
                index,
                size: space.len(),
            });
        }
        if let Some(position) = times.iter().position(|t| !t.is_finite()) {
            return Err(Error::InvalidSequence {
                subject: subject_id,
                reason: format!("non-finite time at position {position}"),
            });
        }
        if let Some(position) = times.windows(2).position(|w| w[1] < w[0]) {
            return Err(Error::DecreasingTimes {
                subject: subject_id,
                position: position + 1,
            });
        }
        Ok(Self {
            subject_id,
            events,
            times,
        })
    }

    /// Builds a sequence from labels, e.g. `[("ER", 0.0), ("RX", 0.96)]`.
    pub fn from_labels<'a>(
        subject_id: impl Into<String>,
        pairs: impl IntoIterator<Item = (&'a str, f64)>,
        space: &StateSpace,
    ) -> Result<Self> {
        let mut events = Vec::new();
        let mut times = Vec::new();
        let mut unknown = Vec::new();
        for (label, time) in pairs {
            match space.index_of(label) {
                Some(i) => events.push(i),
                None => unknown.push(label.to_string()),
            }
            times.push(time);
        }
        if !unknown.is_empty() {
            return Err(Error::UnknownLabels(unknown));
        }
        Self::new(subject_id, events, times, space)
    }

    pub fn subject_id(&self) -> &str {
        &self.subject_id
    }

    pub fn events(&self) -> &[usize] {
        &self.events
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn first(&self) -> usize {
        self.events[0]
    }

    pub fn last(&self) -> usize {
        self.events[self.events.len() - 1]
    }

    /// Consecutive observed transitions `(from, to)`.
    pub fn transitions(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.events.windows(2).map(|w| (w[0], w[1]))
    }

    /// Interarrival times that enter estimation: every `(from, to, tau)` pair
    /// except the first and the last transition of the sequence, whose times
    /// are biased by the study window.
    pub fn retained_interarrivals(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let n = self.events.len();
        let range = if n >= 4 { 1..n - 2 } else { 0..0 };
        range.map(move |p| {
            (
                self.events[p],
                self.events[p + 1],
                self.times[p + 1] - self.times[p],
            )
        })
    }

    /// Copy with new arrival times; used to perturb censored times.
    pub fn with_times(&self, times: Vec<f64>, space: &StateSpace) -> Result<Self> {
        Self::new(self.subject_id.clone(), self.events.clone(), times, space)
    }
}

/// A validated set of sequences in canonical order (ascending subject id)
/// with unique ids. Clustering works on indices into a corpus.
#[derive(Debug, Clone)]
pub struct Corpus {
    space: StateSpace,
    seqs: Vec<EventSequence>,
}

impl Corpus {
    pub fn new(space: StateSpace, mut seqs: Vec<EventSequence>) -> Result<Self> {
        if let Some(bad) = seqs
            .iter()
            .find(|s| s.events.iter().any(|&e| e >= space.len()))
        {
            let index = *bad.events.iter().find(|&&e| e >= space.len()).unwrap();
            return Err(Error::InvalidState {
                subject: bad.subject_id.clone(),
                index,
                size: space.len(),
            });
        }
        seqs.sort_by(|a, b| a.subject_id.cmp(&b.subject_id));
        if let Some(w) = seqs.windows(2).find(|w| w[0].subject_id == w[1].subject_id) {
            return Err(Error::DuplicateSubject(w[0].subject_id.clone()));
        }
        Ok(Self { space, seqs })
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn seqs(&self) -> &[EventSequence] {
        &self.seqs
    }

    pub fn get(&self, index: usize) -> &EventSequence {
        &self.seqs[index]
    }

    pub fn len(&self) -> usize {
        self.seqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seqs.is_empty()
    }

    pub fn index_map(&self) -> HashMap<&str, usize> {
        self.seqs
            .iter()
            .enumerate()
            .map(|(i, s)| (s.subject_id.as_str(), i))
            .collect()
    }

    pub fn into_seqs(self) -> Vec<EventSequence> {
        self.seqs
    }
}
