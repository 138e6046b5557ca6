//! From claim-like records to event sequences, the on-disk formats, and
//! synthetic data generators.

mod formats;
mod mapping;
mod records;
mod simulate;
mod translate;

pub use formats::{
    read_labels, read_sequences, write_labels, write_sequences, SequenceLine,
};
pub use mapping::{EventRule, MappingConfig, SubjectInfo, MAPPING_SCHEMA};
pub use records::{read_records, read_subjects, write_records, ClaimRecord, RecordKind};
pub use simulate::{
    simulate_mixture, simulate_records, GeneratorProfile, GeneratorSpec, NoiseConfig,
    RecordSimulation, SimulatedCorpus, GENERATOR_SCHEMA,
};
pub use translate::{translate, DropReport, Translation};

use chrono::NaiveDate;

use crate::model::DAYS_PER_MONTH;

/// Fractional months for a whole-day offset from the study start.
pub fn days_to_months(days: i64) -> f64 {
    days as f64 / DAYS_PER_MONTH
}

pub(crate) fn days_between(start: NaiveDate, date: NaiveDate) -> i64 {
    (date - start).num_days()
}
