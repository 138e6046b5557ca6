use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::{days_between, days_to_months, ClaimRecord, MappingConfig, RecordKind, SubjectInfo};
use crate::model::EventSequence;
use crate::Result;

/// Per-reason accounting of every input record.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DropReport {
    pub records_in: usize,
    pub records_mapped: usize,
    pub outside_window: usize,
    pub diagnosis_not_allowed: usize,
    pub drug_not_allowed: usize,
    pub unmapped: usize,
    pub duplicate: usize,
    pub age_out_of_range: usize,
    pub ineligible_subject: usize,
    pub subjects: usize,
}

impl DropReport {
    pub fn records_dropped(&self) -> usize {
        self.outside_window
            + self.diagnosis_not_allowed
            + self.drug_not_allowed
            + self.unmapped
            + self.duplicate
            + self.age_out_of_range
            + self.ineligible_subject
    }

    pub fn is_balanced(&self) -> bool {
        self.records_in == self.records_mapped + self.records_dropped()
    }

    fn merge(&mut self, o: &DropReport) {
        self.records_in += o.records_in;
        self.records_mapped += o.records_mapped;
        self.outside_window += o.outside_window;
        self.diagnosis_not_allowed += o.diagnosis_not_allowed;
        self.drug_not_allowed += o.drug_not_allowed;
        self.unmapped += o.unmapped;
        self.duplicate += o.duplicate;
        self.age_out_of_range += o.age_out_of_range;
        self.ineligible_subject += o.ineligible_subject;
        self.subjects += o.subjects;
    }
}

#[derive(Debug, Clone)]
pub struct Translation {
    /// Sequences in ascending subject id order.
    pub sequences: Vec<EventSequence>,
    pub report: DropReport,
}

/// Turns claim records into one event sequence per subject.
///
/// Records outside the study window, off the diagnosis (IP/OT) or drug (RX)
/// allowlists, matched by no rule, or failing the age/eligibility filters
/// (only applied when `subjects` is given) are dropped and counted. Distinct
/// labels on one day are ordered by `same_day_priority`; a repeated
/// `(label, day)` collapses to one event. Times are months from the study
/// start.
pub fn translate(
    records: &[ClaimRecord],
    cfg: &MappingConfig,
    subjects: Option<&HashMap<String, SubjectInfo>>,
) -> Result<Translation> {
    let space = cfg.validate()?;
    let mut by_subject: BTreeMap<&str, Vec<&ClaimRecord>> = BTreeMap::new();
    for r in records {
        by_subject.entry(r.subject_id.as_str()).or_default().push(r);
    }

    let mut report = DropReport::default();
    let mut sequences = Vec::new();
    for (id, recs) in by_subject {
        let (events, part) = translate_subject(&recs, cfg, subjects.map(|s| s.get(id)));
        report.merge(&part);
        if events.is_empty() {
            continue;
        }
        let (labels, days): (Vec<usize>, Vec<i64>) = events
            .into_iter()
            .map(|(day, label)| (space.index_of(label).expect("validated label"), day))
            .unzip();
        let times = days.into_iter().map(days_to_months).collect();
        sequences.push(EventSequence::new(id, labels, times, &space)?);
        report.subjects += 1;
    }
    Ok(Translation { sequences, report })
}

fn translate_subject<'a>(
    recs: &[&ClaimRecord],
    cfg: &'a MappingConfig,
    info: Option<Option<&SubjectInfo>>,
) -> (Vec<(i64, &'a str)>, DropReport) {
    let mut report = DropReport {
        records_in: recs.len(),
        ..Default::default()
    };
    let horizon = cfg.study_days();
    let eligible = match info {
        None => true,
        Some(None) => false,
        Some(Some(s)) => cfg.eligible_years(s.birth_date) >= cfg.min_eligible_years,
    };

    let mut events: Vec<(i64, &str)> = Vec::with_capacity(recs.len());
    for r in recs {
        let day = days_between(cfg.study_start, r.service_date);
        if !(0..=horizon).contains(&day) {
            report.outside_window += 1;
            continue;
        }
        if !eligible {
            report.ineligible_subject += 1;
            continue;
        }
        if let Some(Some(s)) = info {
            if !cfg.age_ok(s.birth_date, r.service_date) {
                report.age_out_of_range += 1;
                continue;
            }
        }
        let label = match r.record_kind {
            RecordKind::RX => {
                if !cfg.drug_allowed(&r.drug_code) {
                    report.drug_not_allowed += 1;
                    continue;
                }
                cfg.rx_label.as_str()
            }
            RecordKind::IP | RecordKind::OT => {
                if !cfg.diagnosis_allowed(&r.diagnosis_code) {
                    report.diagnosis_not_allowed += 1;
                    continue;
                }
                match cfg.rule_label(r) {
                    Some(l) => l,
                    None => {
                        report.unmapped += 1;
                        continue;
                    }
                }
            }
        };
        events.push((day, label));
    }
    events.sort_by(|a, b| a.0.cmp(&b.0).then(cfg.priority_key(a.1).cmp(&cfg.priority_key(b.1))));
    let before = events.len();
    events.dedup();
    report.duplicate = before - events.len();
    report.records_mapped = events.len();
    (events, report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn cfg() -> MappingConfig {
        serde_json::from_str(
            r#"{
              "schema": "mrp-profiles.mapping/1",
              "labels": ["CL","ER","HO","NP","PO","RX"],
              "study_start": "2005-01-01",
              "study_end": "2009-12-31",
              "diagnosis_allowlist": ["493"],
              "rx_drug_allowlist": ["00173"],
              "rules": [
                {"record_kind": "IP", "label": "HO"},
                {"record_kind": "OT", "place_codes": ["23"], "label": "ER"},
                {"record_kind": "OT", "place_codes": ["11"], "label": "PO"}
              ]
            }"#,
        )
        .unwrap()
    }

    fn rec(id: &str, date: &str, kind: RecordKind, place: &str, dx: &str, drug: &str) -> ClaimRecord {
        ClaimRecord {
            subject_id: id.into(),
            service_date: date.parse::<NaiveDate>().unwrap(),
            record_kind: kind,
            place_code: place.into(),
            type_code: String::new(),
            diagnosis_code: dx.into(),
            drug_code: drug.into(),
        }
    }

    #[test]
    fn er_on_first_day() {
        let t = translate(
            &[rec("p", "2005-01-01", RecordKind::OT, "23", "49390", "")],
            &cfg(),
            None,
        )
        .unwrap();
        assert_eq!(t.sequences.len(), 1);
        assert_eq!(t.sequences[0].events(), &[1]);
        assert_eq!(t.sequences[0].times(), &[0.0]);
        assert!(t.report.is_balanced());
    }

    #[test]
    fn same_day_duplicates_collapse() {
        let r = rec("p", "2005-03-01", RecordKind::RX, "", "", "00173-01");
        let t = translate(&[r.clone(), r], &cfg(), None).unwrap();
        assert_eq!(t.sequences[0].len(), 1);
        assert_eq!(t.report.duplicate, 1);
        assert_eq!(t.report.records_mapped, 1);
        assert!(t.report.is_balanced());
    }

    #[test]
    fn same_day_priority_order() {
        let t = translate(
            &[
                rec("p", "2005-03-01", RecordKind::RX, "", "", "00173"),
                rec("p", "2005-03-01", RecordKind::OT, "11", "493", ""),
                rec("p", "2005-03-01", RecordKind::IP, "", "493", ""),
            ],
            &cfg(),
            None,
        )
        .unwrap();
        // HO, PO, RX
        assert_eq!(t.sequences[0].events(), &[2, 4, 5]);
        let times = t.sequences[0].times();
        assert_eq!(times[0], times[2]);
    }

    #[test]
    fn drop_reasons() {
        let recs = [
            rec("p", "2004-12-31", RecordKind::OT, "23", "493", ""),
            rec("p", "2005-02-01", RecordKind::OT, "23", "250", ""),
            rec("p", "2005-02-01", RecordKind::OT, "99", "493", ""),
            rec("p", "2005-02-01", RecordKind::RX, "", "", "55555"),
            rec("q", "2005-02-01", RecordKind::RX, "", "", "00173"),
        ];
        let t = translate(&recs, &cfg(), None).unwrap();
        let r = &t.report;
        assert_eq!(r.outside_window, 1);
        assert_eq!(r.diagnosis_not_allowed, 1);
        assert_eq!(r.unmapped, 1);
        assert_eq!(r.drug_not_allowed, 1);
        assert_eq!(r.records_mapped, 1);
        assert_eq!(r.subjects, 1);
        assert!(r.is_balanced());
    }

    #[test]
    fn eligibility_filters() {
        let mut subjects = HashMap::new();
        subjects.insert(
            "young".to_string(),
            SubjectInfo {
                subject_id: "young".into(),
                birth_date: "2003-05-01".parse().unwrap(),
            },
        );
        subjects.insert(
            "ok".to_string(),
            SubjectInfo {
                subject_id: "ok".into(),
                birth_date: "2001-02-01".parse().unwrap(),
            },
        );
        let recs = [
            rec("young", "2008-01-05", RecordKind::RX, "", "", "00173"),
            rec("ok", "2005-01-05", RecordKind::RX, "", "", "00173"),
            rec("ok", "2006-01-05", RecordKind::RX, "", "", "00173"),
            rec("nobody", "2006-01-05", RecordKind::RX, "", "", "00173"),
        ];
        let t = translate(&recs, &cfg(), Some(&subjects)).unwrap();
        // "ok" is 3 on 2005-01-05
        assert_eq!(t.report.age_out_of_range, 1);
        assert_eq!(t.report.ineligible_subject, 2);
        assert_eq!(t.report.records_mapped, 1);
        assert_eq!(t.sequences.len(), 1);
        assert!(t.report.is_balanced());
    }
}
