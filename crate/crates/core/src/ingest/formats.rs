use std::collections::BTreeSet;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::model::{EventSequence, StateSpace};
use crate::{Error, Result};

/// One line of the canonical sequence file (JSON Lines).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceLine {
    pub id: String,
    pub events: Vec<String>,
    pub times_months: Vec<f64>,
}

impl SequenceLine {
    pub fn from_sequence(seq: &EventSequence, space: &StateSpace) -> Self {
        Self {
            id: seq.subject_id().to_string(),
            events: seq.events().iter().map(|&e| space.label(e).to_string()).collect(),
            times_months: seq.times().to_vec(),
        }
    }
}

/// Reads a JSON Lines sequence file. Blank lines are skipped. Every unknown
/// event label in the file is collected before failing.
pub fn read_sequences<R: BufRead>(reader: R, space: &StateSpace) -> Result<Vec<EventSequence>> {
    let mut out = Vec::new();
    let mut unknown = BTreeSet::new();
    for (n, line) in reader.lines().enumerate() {
        let line_no = n + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: SequenceLine = serde_json::from_str(&line).map_err(|e| Error::Format {
            line: line_no,
            message: e.to_string(),
        })?;
        let events: Vec<Option<usize>> = parsed.events.iter().map(|l| space.index_of(l)).collect();
        if events.iter().any(Option::is_none) {
            for (l, e) in parsed.events.iter().zip(&events) {
                if e.is_none() {
                    unknown.insert(l.clone());
                }
            }
            continue;
        }
        let events = events.into_iter().map(Option::unwrap).collect();
        let seq = EventSequence::new(parsed.id, events, parsed.times_months, space).map_err(|e| {
            Error::Format {
                line: line_no,
                message: e.to_string(),
            }
        })?;
        out.push(seq);
    }
    if !unknown.is_empty() {
        return Err(Error::UnknownLabels(unknown.into_iter().collect()));
    }
    Ok(out)
}

pub fn write_sequences<W: Write>(mut writer: W, seqs: &[EventSequence], space: &StateSpace) -> Result<()> {
    for seq in seqs {
        serde_json::to_writer(&mut writer, &SequenceLine::from_sequence(seq, space))?;
        writer.write_all(b"\n")?;
    }
    writer.flush()?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct LabelRow {
    id: String,
    profile: usize,
}

/// Writes ground-truth profile labels as `id,profile`.
pub fn write_labels<W: Write>(writer: W, seqs: &[EventSequence], labels: &[usize]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    for (seq, &profile) in seqs.iter().zip(labels) {
        wtr.serialize(LabelRow {
            id: seq.subject_id().to_string(),
            profile,
        })?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_labels<R: std::io::Read>(reader: R) -> Result<Vec<(String, usize)>> {
    let mut rdr = csv::Reader::from_reader(reader);
    rdr.deserialize::<LabelRow>()
        .map(|r| r.map(|row| (row.id, row.profile)).map_err(Error::from))
        .collect()
}
