//! Planted generator designs over the six provider types, used by the
//! recovery experiments, the benchmark and the CLI defaults.
//!
//! Rows are written as `(destination, probability)` lists over
//! `CL, ER, HO, NP, PO, RX, RC`; rates as `(destination, mean months)`
//! with every other cell at `default_mean` months.

use crate::ingest::{GeneratorProfile, GeneratorSpec, GENERATOR_SCHEMA};
use crate::model::{MrpParams, StateSpace};

const LABELS: [&str; 6] = ["CL", "ER", "HO", "NP", "PO", "RX"];
const STUDY_DAYS: i64 = 1825;

fn col(label: &str) -> usize {
    if label == "RC" {
        6
    } else {
        LABELS.iter().position(|l| *l == label).expect("known label")
    }
}

struct ProfileSketch<'a> {
    name: &'a str,
    weight: f64,
    initial: &'a [(&'a str, f64)],
    rows: [&'a [(&'a str, f64)]; 6],
    means: &'a [(&'a str, &'a str, f64)],
    default_mean: f64,
}

fn build(p: &ProfileSketch) -> GeneratorProfile {
    let mut transition = vec![vec![0.0; 7]; 7];
    for (i, row) in p.rows.iter().enumerate() {
        for &(to, prob) in row.iter() {
            transition[i][col(to)] = prob;
        }
    }
    for &(to, prob) in p.initial {
        transition[6][col(to)] = prob;
    }
    let mut rates = vec![vec![1.0 / p.default_mean; 6]; 6];
    for &(from, to, mean) in p.means {
        rates[col(from)][col(to)] = 1.0 / mean;
    }
    GeneratorProfile {
        name: p.name.into(),
        weight: p.weight,
        params: MrpParams::new(transition, rates).expect("design rows are stochastic"),
    }
}

fn spec(profiles: Vec<GeneratorProfile>, seed: u64) -> GeneratorSpec {
    GeneratorSpec {
        schema: GENERATOR_SCHEMA.into(),
        labels: LABELS.iter().map(|s| s.to_string()).collect(),
        profiles,
        study_days: STUDY_DAYS,
        start_spread_days: 0,
        max_events: None,
        seed,
    }
}

pub fn space() -> StateSpace {
    StateSpace::provider_types()
}

fn rx_refill(weight: f64) -> GeneratorProfile {
    build(&ProfileSketch {
        name: "rx-refill",
        weight,
        initial: &[("RX", 1.0)],
        rows: [
            &[("PO", 0.5), ("RX", 0.3), ("RC", 0.2)],
            &[("HO", 0.1), ("PO", 0.3), ("RX", 0.4), ("RC", 0.2)],
            &[("ER", 0.1), ("PO", 0.2), ("RX", 0.5), ("RC", 0.2)],
            &[("PO", 0.5), ("RX", 0.3), ("RC", 0.2)],
            &[("ER", 0.05), ("PO", 0.3), ("RX", 0.5), ("RC", 0.15)],
            &[("ER", 0.02), ("PO", 0.05), ("RX", 0.85), ("RC", 0.08)],
        ],
        means: &[("RX", "RX", 1.5), ("PO", "RX", 1.0)],
        default_mean: 3.0,
    })
}

fn office(weight: f64) -> GeneratorProfile {
    build(&ProfileSketch {
        name: "office",
        weight,
        initial: &[("PO", 0.85), ("RX", 0.05), ("CL", 0.05), ("NP", 0.05)],
        rows: [
            &[("CL", 0.2), ("PO", 0.6), ("RC", 0.2)],
            &[("ER", 0.1), ("PO", 0.5), ("RC", 0.4)],
            &[("PO", 0.5), ("RC", 0.5)],
            &[("NP", 0.2), ("PO", 0.6), ("RC", 0.2)],
            &[("CL", 0.05), ("NP", 0.05), ("PO", 0.7), ("RX", 0.05), ("RC", 0.15)],
            &[("PO", 0.6), ("RX", 0.1), ("RC", 0.3)],
        ],
        means: &[("PO", "PO", 6.0)],
        default_mean: 4.0,
    })
}

fn clinic(weight: f64) -> GeneratorProfile {
    build(&ProfileSketch {
        name: "clinic",
        weight,
        initial: &[("CL", 0.6), ("ER", 0.2), ("PO", 0.2)],
        rows: [
            &[("CL", 0.45), ("ER", 0.1), ("PO", 0.25), ("RX", 0.1), ("RC", 0.1)],
            &[("CL", 0.5), ("ER", 0.1), ("PO", 0.2), ("RC", 0.2)],
            &[("CL", 0.5), ("PO", 0.3), ("RC", 0.2)],
            &[("CL", 0.5), ("PO", 0.3), ("RC", 0.2)],
            &[("CL", 0.5), ("PO", 0.2), ("RX", 0.15), ("RC", 0.15)],
            &[("CL", 0.4), ("RX", 0.3), ("PO", 0.1), ("RC", 0.2)],
        ],
        means: &[("CL", "CL", 5.0), ("RX", "RX", 4.2)],
        default_mean: 4.0,
    })
}

fn acute(weight: f64) -> GeneratorProfile {
    build(&ProfileSketch {
        name: "acute",
        weight,
        initial: &[("ER", 0.6), ("HO", 0.4)],
        rows: [
            &[("ER", 0.4), ("HO", 0.2), ("PO", 0.2), ("RC", 0.2)],
            &[("ER", 0.3), ("HO", 0.35), ("RX", 0.25), ("RC", 0.1)],
            &[("ER", 0.35), ("HO", 0.3), ("RX", 0.25), ("RC", 0.1)],
            &[("ER", 0.4), ("HO", 0.2), ("PO", 0.2), ("RC", 0.2)],
            &[("ER", 0.3), ("HO", 0.3), ("RX", 0.2), ("RC", 0.2)],
            &[("ER", 0.35), ("HO", 0.35), ("RX", 0.2), ("RC", 0.1)],
        ],
        means: &[("ER", "ER", 4.0), ("HO", "HO", 2.8)],
        default_mean: 2.3,
    })
}

/// One profile: refill-dominated histories.
pub fn homogeneous(seed: u64) -> GeneratorSpec {
    spec(vec![rx_refill(1.0)], seed)
}

/// Two well separated profiles of equal weight: refill-dominated and
/// ER/HO-dominated.
pub fn two_profiles(seed: u64) -> GeneratorSpec {
    spec(vec![rx_refill(0.5), acute(0.5)], seed)
}

/// Four profiles: refill-heavy, office with refills, clinic/ER-touched and
/// high-variation ER/HO.
pub fn four_profiles(seed: u64) -> GeneratorSpec {
    spec(
        vec![rx_refill(0.25), office(0.25), clinic(0.25), acute(0.25)],
        seed,
    )
}
