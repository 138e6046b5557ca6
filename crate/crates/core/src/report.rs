//! Versioned JSON fit report: everything needed to score new sequences and
//! to audit the split history.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::clustering::{ClusterConfig, ClusterTree, SplitRecord};
use crate::model::{model_size, MrpParams, StateSpace};
use crate::{Error, Result};

pub const FIT_REPORT_SCHEMA: &str = "mrp-profiles.fit_report/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileReport {
    /// 1-based number in reporting order (descending size).
    pub profile: usize,
    pub leaf_id: usize,
    pub parent: Option<usize>,
    pub size: usize,
    pub loglik: f64,
    pub n_events: u64,
    /// Visits per state, in label order.
    pub visits: Vec<u64>,
    pub params: MrpParams,
    pub member_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub schema: String,
    pub seed: u64,
    pub config: ClusterConfig,
    /// Free-form run context (input path, tool version, extra knobs).
    #[serde(default)]
    pub run: BTreeMap<String, String>,
    pub labels: Vec<String>,
    pub n_subjects: usize,
    pub n_profiles: usize,
    pub model_size: usize,
    pub total_loglik: f64,
    pub global_bic: f64,
    pub profiles: Vec<ProfileReport>,
    pub history: Vec<SplitRecord>,
}

impl FitReport {
    pub fn from_tree(tree: &ClusterTree, corpus: &crate::model::Corpus) -> Self {
        let space = corpus.space();
        let profiles = tree
            .report_order()
            .into_iter()
            .enumerate()
            .map(|(rank, k)| {
                let leaf = &tree.leaves[k];
                ProfileReport {
                    profile: rank + 1,
                    leaf_id: leaf.id,
                    parent: leaf.parent,
                    size: leaf.model.size(),
                    loglik: leaf.model.loglik,
                    n_events: leaf.model.stats.total_events(),
                    visits: (0..space.len()).map(|j| leaf.model.stats.visits(j)).collect(),
                    params: leaf.model.params.clone(),
                    member_ids: leaf.model.member_ids(corpus).into_iter().map(String::from).collect(),
                }
            })
            .collect();
        Self {
            schema: FIT_REPORT_SCHEMA.into(),
            seed: tree.rng_seed,
            config: tree.config.clone(),
            run: BTreeMap::new(),
            labels: (0..space.len()).map(|j| space.label(j).to_string()).collect(),
            n_subjects: tree.n_subjects,
            n_profiles: tree.n_profiles(),
            model_size: model_size(tree.n_profiles(), tree.n_states),
            total_loglik: tree.total_loglik,
            global_bic: tree.global_bic,
            profiles,
            history: tree.history.clone(),
        }
    }

    pub fn space(&self) -> Result<StateSpace> {
        StateSpace::new(self.labels.clone())
    }

    /// Profile parameters in reporting order.
    pub fn params(&self) -> Vec<MrpParams> {
        self.profiles.iter().map(|p| p.params.clone()).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn write<W: Write>(&self, mut writer: W) -> Result<()> {
        writer.write_all(self.to_json()?.as_bytes())?;
        Ok(())
    }

    /// Parses a report, refusing any schema other than the current one.
    pub fn read<R: Read>(reader: R) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_reader(reader)?;
        let found = value
            .get("schema")
            .and_then(|s| s.as_str())
            .unwrap_or("<missing>")
            .to_string();
        if found != FIT_REPORT_SCHEMA {
            return Err(Error::Schema {
                expected: FIT_REPORT_SCHEMA.into(),
                found,
            });
        }
        let report: FitReport = serde_json::from_value(value)?;
        let s = report.labels.len();
        if report
            .profiles
            .iter()
            .any(|p| p.params.n_states() != s || p.visits.len() != s)
        {
            return Err(Error::InvalidParams("profile parameters do not match labels".into()));
        }
        Ok(report)
    }

    /// Plain-text summary, profiles in reporting order.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{} subjects, {} profiles, loglik {:.3}, BIC {:.3}, seed {}",
            self.n_subjects, self.n_profiles, self.total_loglik, self.global_bic, self.seed
        );
        for p in &self.profiles {
            let share = p.size as f64 / self.n_subjects.max(1) as f64;
            let _ = writeln!(
                out,
                "profile {}: {} members ({:.1}%), {} events, loglik {:.3}",
                p.profile,
                p.size,
                100.0 * share,
                p.n_events,
                p.loglik
            );
        }
        let accepted = self.history.iter().filter(|h| h.accepted).count();
        let _ = writeln!(out, "split attempts: {}, accepted: {}", self.history.len(), accepted);
        out
    }
}
