use chrono::Duration;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use super::{days_to_months, ClaimRecord, MappingConfig, RecordKind};
use crate::model::{EventSequence, MrpParams, StateSpace, DAYS_PER_MONTH};
use crate::{Error, Result};

pub const GENERATOR_SCHEMA: &str = "mrp-profiles.generator/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorProfile {
    #[serde(default)]
    pub name: String,
    pub weight: f64,
    /// The `LC` row is the initial-state distribution.
    pub params: MrpParams,
}

/// A planted mixture of MRP profiles.
///
/// Sequence lengths follow from the chain itself: a subject's history ends
/// on a jump to `RC`, when the next arrival would fall after `study_days`,
/// or at `max_events` if set. First arrivals are uniform on
/// `0..=start_spread_days`. Interarrivals are rounded to whole days with a
/// one-day minimum so that histories survive a trip through dated records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub schema: String,
    pub labels: Vec<String>,
    pub profiles: Vec<GeneratorProfile>,
    pub study_days: i64,
    #[serde(default)]
    pub start_spread_days: i64,
    #[serde(default)]
    pub max_events: Option<usize>,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn space(&self) -> Result<StateSpace> {
        StateSpace::new(self.labels.iter().cloned())
    }

    pub fn validate(&self) -> Result<StateSpace> {
        if self.schema != GENERATOR_SCHEMA {
            return Err(Error::Schema {
                expected: GENERATOR_SCHEMA.into(),
                found: self.schema.clone(),
            });
        }
        let space = self.space()?;
        if self.profiles.is_empty() {
            return Err(Error::Config("generator needs at least one profile".into()));
        }
        let total: f64 = self.profiles.iter().map(|p| p.weight).sum();
        if self.profiles.iter().any(|p| !(p.weight >= 0.0)) || (total - 1.0).abs() > 1e-9 {
            return Err(Error::Config("profile weights must be non-negative and sum to 1".into()));
        }
        if self.profiles.iter().any(|p| p.params.n_states() != space.len()) {
            return Err(Error::Config("profile parameters do not match the labels".into()));
        }
        if self.study_days < 0 || self.start_spread_days < 0 || self.start_spread_days > self.study_days {
            return Err(Error::Config("invalid study window".into()));
        }
        if self.max_events == Some(0) {
            return Err(Error::Config("max_events must be at least 1".into()));
        }
        Ok(space)
    }
}

/// Simulated sequences with their generating profile indices.
#[derive(Debug, Clone)]
pub struct SimulatedCorpus {
    pub space: StateSpace,
    pub sequences: Vec<EventSequence>,
    pub labels: Vec<usize>,
}

struct RawSubject {
    id: String,
    profile: usize,
    events: Vec<usize>,
    days: Vec<i64>,
}

fn draw(row: &[f64], rng: &mut impl Rng) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (k, &p) in row.iter().enumerate() {
        acc += p;
        if u < acc {
            return k;
        }
    }
    // rounding slack: last cell with positive mass
    row.iter().rposition(|&p| p > 0.0).unwrap_or(row.len() - 1)
}

fn simulate_raw(spec: &GeneratorSpec, n_subjects: usize) -> Result<(StateSpace, Vec<RawSubject>)> {
    let space = spec.validate()?;
    let s = space.len();
    let weights: Vec<f64> = spec.profiles.iter().map(|p| p.weight).collect();
    let width = n_subjects.to_string().len().max(6);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut out = Vec::with_capacity(n_subjects);
    for r in 0..n_subjects {
        let k = draw(&weights, &mut rng);
        let params = &spec.profiles[k].params;
        let mut day = if spec.start_spread_days > 0 {
            rng.random_range(0..=spec.start_spread_days)
        } else {
            0
        };
        let mut state = draw(params.initial(), &mut rng);
        let mut events = vec![state];
        let mut days = vec![day];
        loop {
            if spec.max_events.is_some_and(|m| events.len() >= m) {
                break;
            }
            let next = draw(params.row(state), &mut rng);
            if next == s {
                break;
            }
            let tau = Exp::new(params.rate(state, next))
                .expect("validated rate")
                .sample(&mut rng);
            let step = ((tau * DAYS_PER_MONTH).round() as i64).max(1);
            day = day.saturating_add(step);
            if day > spec.study_days {
                break;
            }
            state = next;
            events.push(state);
            days.push(day);
        }
        out.push(RawSubject {
            id: format!("s{:0width$}", r + 1),
            profile: k,
            events,
            days,
        });
    }
    Ok((space, out))
}

/// Draws `n_subjects` histories from the planted mixture. Fully determined
/// by `spec.seed`; subject ids are zero-padded so they sort in draw order.
pub fn simulate_mixture(spec: &GeneratorSpec, n_subjects: usize) -> Result<SimulatedCorpus> {
    let (space, raw) = simulate_raw(spec, n_subjects)?;
    let mut sequences = Vec::with_capacity(raw.len());
    let mut labels = Vec::with_capacity(raw.len());
    for subj in raw {
        let times = subj.days.iter().map(|&d| days_to_months(d)).collect();
        sequences.push(EventSequence::new(subj.id, subj.events, times, &space)?);
        labels.push(subj.profile);
    }
    Ok(SimulatedCorpus {
        space,
        sequences,
        labels,
    })
}

/// Record-level noise injected by [`simulate_records`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    /// Probability that a record is emitted twice.
    pub duplicate_rate: f64,
    /// Probability, per event, of an extra OT record with an off-allowlist
    /// diagnosis on the same day.
    pub off_allowlist_rate: f64,
}

#[derive(Debug, Clone)]
pub struct RecordSimulation {
    pub records: Vec<ClaimRecord>,
    pub truth: SimulatedCorpus,
    pub injected_duplicates: usize,
    pub injected_off_allowlist: usize,
}

/// Representative record for a label: the first rule targeting it, its
/// first place/type codes and the first allowlisted code.
fn representative(cfg: &MappingConfig, label: &str) -> Result<(RecordKind, String, String, String, String)> {
    if label == cfg.rx_label {
        let drug = cfg
            .rx_drug_allowlist
            .first()
            .ok_or_else(|| Error::Config("rx_drug_allowlist is empty".into()))?;
        return Ok((RecordKind::RX, String::new(), String::new(), String::new(), drug.clone()));
    }
    let rule = cfg
        .rules
        .iter()
        .find(|r| r.label == label)
        .ok_or_else(|| Error::Config(format!("no rule produces label {label:?}")))?;
    let dx = cfg
        .diagnosis_allowlist
        .first()
        .ok_or_else(|| Error::Config("diagnosis_allowlist is empty".into()))?;
    Ok((
        rule.record_kind,
        rule.place_codes.first().cloned().unwrap_or_default(),
        rule.type_codes.first().cloned().unwrap_or_default(),
        dx.clone(),
        String::new(),
    ))
}

fn off_allowlist_code(cfg: &MappingConfig) -> String {
    (0u32..)
        .map(|k| format!("Z{k:04}"))
        .find(|c| !cfg.diagnosis_allowed(c))
        .expect("some code is off the allowlist")
}

/// Simulates a mixture and renders it as dated claim records, inverting the
/// mapping with one representative code per label, plus optional noise.
pub fn simulate_records(
    spec: &GeneratorSpec,
    cfg: &MappingConfig,
    n_subjects: usize,
    noise: &NoiseConfig,
) -> Result<RecordSimulation> {
    let mapped_space = cfg.validate()?;
    let (space, raw) = simulate_raw(spec, n_subjects)?;
    if mapped_space != space {
        return Err(Error::Config("generator and mapping labels differ".into()));
    }
    if spec.study_days > cfg.study_days() {
        return Err(Error::Config("generator window exceeds the mapping's study window".into()));
    }
    let reps = space
        .labels()
        .iter()
        .map(|l| representative(cfg, l))
        .collect::<Result<Vec<_>>>()?;
    let bad_dx = off_allowlist_code(cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ 0x5eed_0f_4ec0_4d5);

    let mut records = Vec::new();
    let (mut dups, mut offs) = (0, 0);
    let mut sequences = Vec::with_capacity(raw.len());
    let mut labels = Vec::with_capacity(raw.len());
    for subj in raw {
        for (&e, &d) in subj.events.iter().zip(&subj.days) {
            let (kind, place, typ, dx, drug) = &reps[e];
            let rec = ClaimRecord {
                subject_id: subj.id.clone(),
                service_date: cfg.study_start + Duration::days(d),
                record_kind: *kind,
                place_code: place.clone(),
                type_code: typ.clone(),
                diagnosis_code: dx.clone(),
                drug_code: drug.clone(),
            };
            if noise.duplicate_rate > 0.0 && rng.random_bool(noise.duplicate_rate.min(1.0)) {
                records.push(rec.clone());
                dups += 1;
            }
            if noise.off_allowlist_rate > 0.0 && rng.random_bool(noise.off_allowlist_rate.min(1.0)) {
                records.push(ClaimRecord {
                    record_kind: RecordKind::OT,
                    diagnosis_code: bad_dx.clone(),
                    drug_code: String::new(),
                    ..rec.clone()
                });
                offs += 1;
            }
            records.push(rec);
        }
        let times = subj.days.iter().map(|&d| days_to_months(d)).collect();
        sequences.push(EventSequence::new(subj.id, subj.events, times, &space)?);
        labels.push(subj.profile);
    }
    Ok(RecordSimulation {
        records,
        truth: SimulatedCorpus {
            space,
            sequences,
            labels,
        },
        injected_duplicates: dups,
        injected_off_allowlist: offs,
    })
}
