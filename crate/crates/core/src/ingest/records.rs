use std::collections::HashMap;
use std::io::{Read, Write};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::SubjectInfo;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RecordKind {
    IP,
    OT,
    RX,
}

/// One claim line. Column order matches the CSV header
/// `subject_id,service_date,record_kind,place_code,type_code,diagnosis_code,drug_code`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClaimRecord {
    pub subject_id: String,
    pub service_date: NaiveDate,
    pub record_kind: RecordKind,
    #[serde(default)]
    pub place_code: String,
    #[serde(default)]
    pub type_code: String,
    #[serde(default)]
    pub diagnosis_code: String,
    #[serde(default)]
    pub drug_code: String,
}

fn csv_error(e: csv::Error) -> Error {
    match e.position() {
        Some(pos) => Error::Format {
            line: pos.line() as usize,
            message: e.to_string(),
        },
        None => Error::Csv(e),
    }
}

pub fn read_records<R: Read>(reader: R) -> Result<Vec<ClaimRecord>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    rdr.deserialize().map(|r| r.map_err(csv_error)).collect()
}

pub fn write_records<W: Write>(writer: W, records: &[ClaimRecord]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    if records.is_empty() {
        wtr.write_record([
            "subject_id",
            "service_date",
            "record_kind",
            "place_code",
            "type_code",
            "diagnosis_code",
            "drug_code",
        ])?;
    }
    for r in records {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Reads the optional `subject_id,birth_date` table used for age and
/// eligibility filtering.
pub fn read_subjects<R: Read>(reader: R) -> Result<HashMap<String, SubjectInfo>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut out = HashMap::new();
    for row in rdr.deserialize::<SubjectInfo>() {
        let info = row.map_err(csv_error)?;
        out.insert(info.subject_id.clone(), info);
    }
    Ok(out)
}
