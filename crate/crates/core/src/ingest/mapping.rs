use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use super::{ClaimRecord, RecordKind};
use crate::model::StateSpace;
use crate::{Error, Result};

pub const MAPPING_SCHEMA: &str = "mrp-profiles.mapping/1";

/// Maps IP/OT records of one kind with matching place and type codes to an
/// event label. An empty code list matches any code.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventRule {
    pub record_kind: RecordKind,
    #[serde(default)]
    pub place_codes: Vec<String>,
    #[serde(default)]
    pub type_codes: Vec<String>,
    pub label: String,
}

impl EventRule {
    pub fn matches(&self, record: &ClaimRecord) -> bool {
        self.record_kind == record.record_kind
            && code_in(&self.place_codes, &record.place_code)
            && code_in(&self.type_codes, &record.type_code)
    }

    fn overlaps(&self, other: &EventRule) -> bool {
        fn sets_meet(a: &[String], b: &[String]) -> bool {
            a.is_empty() || b.is_empty() || a.iter().any(|x| b.contains(x))
        }
        self.record_kind == other.record_kind
            && sets_meet(&self.place_codes, &other.place_codes)
            && sets_meet(&self.type_codes, &other.type_codes)
    }
}

fn code_in(set: &[String], code: &str) -> bool {
    set.is_empty() || set.iter().any(|c| c == code)
}

/// Subject attributes for the age and enrollment filters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubjectInfo {
    pub subject_id: String,
    pub birth_date: NaiveDate,
}

fn default_priority() -> Vec<String> {
    ["HO", "ER", "CL", "NP", "PO", "RX"]
        .into_iter()
        .map(String::from)
        .collect()
}

fn default_rx_label() -> String {
    "RX".into()
}

fn default_min_age() -> u32 {
    4
}

fn default_max_age() -> u32 {
    18
}

fn default_min_eligible_years() -> u32 {
    4
}

/// User-supplied translation table from claim codes to event labels, with
/// the cohort filters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MappingConfig {
    pub schema: String,
    /// Event alphabet in state order.
    pub labels: Vec<String>,
    pub study_start: NaiveDate,
    pub study_end: NaiveDate,
    /// Diagnosis code prefixes admitted for IP/OT records.
    pub diagnosis_allowlist: Vec<String>,
    /// Drug code prefixes admitted for RX records.
    pub rx_drug_allowlist: Vec<String>,
    #[serde(default = "default_rx_label")]
    pub rx_label: String,
    /// IP/OT rules, in priority order.
    pub rules: Vec<EventRule>,
    #[serde(default = "default_min_age")]
    pub min_age: u32,
    #[serde(default = "default_max_age")]
    pub max_age: u32,
    #[serde(default = "default_min_eligible_years")]
    pub min_eligible_years: u32,
    /// Order of distinct labels that share a service date.
    #[serde(default = "default_priority")]
    pub same_day_priority: Vec<String>,
}

impl MappingConfig {
    pub fn space(&self) -> Result<StateSpace> {
        StateSpace::new(self.labels.iter().cloned())
    }

    pub fn validate(&self) -> Result<StateSpace> {
        if self.schema != MAPPING_SCHEMA {
            return Err(Error::Schema {
                expected: MAPPING_SCHEMA.into(),
                found: self.schema.clone(),
            });
        }
        let space = self.space()?;
        if self.study_end < self.study_start {
            return Err(Error::Config("study_end precedes study_start".into()));
        }
        if self.min_age > self.max_age {
            return Err(Error::Config("min_age exceeds max_age".into()));
        }
        let unknown: Vec<String> = self
            .rules
            .iter()
            .map(|r| &r.label)
            .chain(std::iter::once(&self.rx_label))
            .filter(|l| space.index_of(l).is_none())
            .cloned()
            .collect();
        if !unknown.is_empty() {
            return Err(Error::UnknownLabels(unknown));
        }
        for (i, rule) in self.rules.iter().enumerate() {
            if rule.record_kind == RecordKind::RX {
                return Err(Error::Config(format!(
                    "rule {i}: RX records are mapped through rx_drug_allowlist"
                )));
            }
            if let Some(j) = self.rules[..i].iter().position(|r| r.overlaps(rule)) {
                return Err(Error::Config(format!("rule {i} overlaps rule {j}")));
            }
        }
        Ok(space)
    }

    pub fn diagnosis_allowed(&self, code: &str) -> bool {
        self.diagnosis_allowlist.iter().any(|p| code.starts_with(p.as_str()))
    }

    pub fn drug_allowed(&self, code: &str) -> bool {
        !code.is_empty() && self.rx_drug_allowlist.iter().any(|p| code.starts_with(p.as_str()))
    }

    /// Label of the first matching rule for an IP/OT record.
    pub fn rule_label(&self, record: &ClaimRecord) -> Option<&str> {
        self.rules
            .iter()
            .find(|r| r.matches(record))
            .map(|r| r.label.as_str())
    }

    /// Same-day ordering key; labels missing from the priority list sort
    /// after it, alphabetically.
    pub(crate) fn priority_key<'a>(&self, label: &'a str) -> (usize, &'a str) {
        let rank = self
            .same_day_priority
            .iter()
            .position(|l| l == label)
            .unwrap_or(self.same_day_priority.len());
        (rank, label)
    }

    pub(crate) fn study_days(&self) -> i64 {
        super::days_between(self.study_start, self.study_end)
    }

    pub(crate) fn age_ok(&self, birth: NaiveDate, on: NaiveDate) -> bool {
        let age = age_on(birth, on);
        age >= self.min_age as i32 && age <= self.max_age as i32
    }

    /// Study years (calendar years overlapping the window) in which the
    /// subject is within the age band on 1 July.
    pub(crate) fn eligible_years(&self, birth: NaiveDate) -> u32 {
        (self.study_start.year()..=self.study_end.year())
            .filter(|&y| {
                NaiveDate::from_ymd_opt(y, 7, 1).is_some_and(|mid| self.age_ok(birth, mid))
            })
            .count() as u32
    }
}

fn age_on(birth: NaiveDate, on: NaiveDate) -> i32 {
    let mut age = on.year() - birth.year();
    if (on.month(), on.day()) < (birth.month(), birth.day()) {
        age -= 1;
    }
    age
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn config() -> MappingConfig {
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

    #[test]
    fn defaults_and_validation() {
        let cfg = config();
        assert_eq!(cfg.min_age, 4);
        assert_eq!(cfg.max_age, 18);
        assert_eq!(cfg.min_eligible_years, 4);
        assert_eq!(cfg.rx_label, "RX");
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn overlapping_rules_rejected() {
        let mut cfg = config();
        cfg.rules.push(EventRule {
            record_kind: RecordKind::OT,
            place_codes: vec![],
            type_codes: vec![],
            label: "CL".into(),
        });
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn unknown_rule_label_rejected() {
        let mut cfg = config();
        cfg.rules[0].label = "XX".into();
        assert!(matches!(cfg.validate(), Err(Error::UnknownLabels(_))));
    }

    #[test]
    fn ages() {
        let cfg = config();
        let d = |s: &str| s.parse::<NaiveDate>().unwrap();
        assert_eq!(age_on(d("2000-06-15"), d("2005-06-14")), 4);
        assert_eq!(age_on(d("2000-06-15"), d("2005-06-15")), 5);
        // ages 4..8 over 2005-2009: all five years eligible
        assert_eq!(cfg.eligible_years(d("2001-01-01")), 5);
        // turns 4 in 2007 -> eligible 2007, 2008, 2009 only
        assert_eq!(cfg.eligible_years(d("2003-05-01")), 3);
        // 19 by mid-2008
        assert_eq!(cfg.eligible_years(d("1989-03-01")), 3);
    }
}
