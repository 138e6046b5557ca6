//! Independent reference computations shared by the integration tests.
//!
//! Nothing here calls into the estimation or scoring code of the crate; the
//! helpers work on plain vectors so they can serve as oracles.

#![allow(dead_code)]

use std::collections::HashMap;

use rand::Rng;
use rand_distr::{Distribution, Exp, Gamma};

use mrp_profiles::model::{Corpus, EventSequence, MrpParams, StateSpace};

pub const FLOOR: f64 = 1e-9;

/// Row-stochastic transition matrix (with LC row and RC column, LC->RC = 0)
/// and positive rates, drawn at random.
pub fn random_params<R: Rng>(rng: &mut R, s: usize, shape: f64) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let gamma = Gamma::new(shape, 1.0).unwrap();
    let mut p = vec![vec![0.0; s + 1]; s + 1];
    for (i, row) in p.iter_mut().enumerate() {
        let width = if i == s { s } else { s + 1 };
        let draws: Vec<f64> = (0..width).map(|_| gamma.sample(rng).max(1e-6)).collect();
        let total: f64 = draws.iter().sum();
        for (j, d) in draws.into_iter().enumerate() {
            row[j] = d / total;
        }
    }
    let rates = (0..s)
        .map(|_| (0..s).map(|_| rng.random_range(0.2..4.0)).collect())
        .collect();
    (p, rates)
}

pub fn to_params(p: &[Vec<f64>], rates: &[Vec<f64>]) -> MrpParams {
    MrpParams::new(p.to_vec(), rates.to_vec()).unwrap()
}

pub fn random_events<R: Rng>(rng: &mut R, s: usize, max_len: usize) -> (Vec<usize>, Vec<f64>) {
    let len = rng.random_range(1..=max_len);
    let events = (0..len).map(|_| rng.random_range(0..s)).collect();
    let mut t = rng.random_range(0.0..3.0);
    let mut times = Vec::with_capacity(len);
    for _ in 0..len {
        times.push(t);
        t += rng.random_range(0.0..5.0);
    }
    (events, times)
}

/// Log-likelihood of one sequence, summed term by term over the augmented
/// path `LC, e_1, ..., e_L, RC`, plus the exponential log-densities of the
/// interarrivals that are neither the first nor the last one.
pub fn brute_force_loglik(events: &[usize], times: &[f64], p: &[Vec<f64>], rates: &[Vec<f64>]) -> f64 {
    let s = rates.len();
    let mut path = vec![s];
    path.extend_from_slice(events);
    path.push(s);
    let mut ll = 0.0;
    for w in path.windows(2) {
        ll += p[w[0]][w[1]].max(FLOOR).ln();
    }
    let l = events.len();
    for k in 1..l.saturating_sub(2) {
        let (a, b) = (events[k], events[k + 1]);
        let tau = times[k + 1] - times[k];
        ll += (rates[a][b] * (-rates[a][b] * tau).exp()).ln();
    }
    ll
}

/// Monte-Carlo estimate of the KL divergence between the joint laws of
/// (next state, interarrival) out of real state `i` under `a` and `b`.
/// Returns (mean, standard error).
pub fn monte_carlo_kl<R: Rng>(
    rng: &mut R,
    i: usize,
    a: (&[Vec<f64>], &[Vec<f64>]),
    b: (&[Vec<f64>], &[Vec<f64>]),
    n: usize,
) -> (f64, f64) {
    let s = a.1.len();
    let row = &a.0[i];
    let cum: Vec<f64> = row
        .iter()
        .scan(0.0, |acc, &x| {
            *acc += x;
            Some(*acc)
        })
        .collect();
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..n {
        let u: f64 = rng.random::<f64>() * cum[s];
        let j = cum.iter().position(|&c| u < c).unwrap_or(s);
        let mut x = (a.0[i][j] / b.0[i][j]).ln();
        if j < s {
            let (la, lb) = (a.1[i][j], b.1[i][j]);
            let tau = Exp::new(la).unwrap().sample(rng);
            x += (la.ln() - la * tau) - (lb.ln() - lb * tau);
        }
        sum += x;
        sum_sq += x * x;
    }
    let mean = sum / n as f64;
    let var = (sum_sq / n as f64 - mean * mean).max(0.0);
    (mean, (var / n as f64).sqrt())
}

/// Adjusted Rand index between two labelings of the same items.
pub fn adjusted_rand_index(x: &[usize], y: &[usize]) -> f64 {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mut table: HashMap<(usize, usize), f64> = HashMap::new();
    let mut rows: HashMap<usize, f64> = HashMap::new();
    let mut cols: HashMap<usize, f64> = HashMap::new();
    for (&a, &b) in x.iter().zip(y) {
        *table.entry((a, b)).or_default() += 1.0;
        *rows.entry(a).or_default() += 1.0;
        *cols.entry(b).or_default() += 1.0;
    }
    let c2 = |v: f64| v * (v - 1.0) / 2.0;
    let index: f64 = table.values().map(|&v| c2(v)).sum();
    let sr: f64 = rows.values().map(|&v| c2(v)).sum();
    let sc: f64 = cols.values().map(|&v| c2(v)).sum();
    let expected = sr * sc / c2(n);
    let max = 0.5 * (sr + sc);
    if (max - expected).abs() < 1e-12 {
        return 1.0;
    }
    (index - expected) / (max - expected)
}

/// Stationary-like visit shares of a generator: expected visits per state
/// before absorption in RC, started from the LC row, normalised. Computed
/// by iterating the chain's occupation measure.
pub fn expected_visit_shares(p: &[Vec<f64>]) -> Vec<f64> {
    let s = p.len() - 1;
    let mut mass: Vec<f64> = p[s][..s].to_vec();
    let mut visits = vec![0.0; s];
    for _ in 0..10_000 {
        for j in 0..s {
            visits[j] += mass[j];
        }
        let mut next = vec![0.0; s];
        for i in 0..s {
            for j in 0..s {
                next[j] += mass[i] * p[i][j];
            }
        }
        if next.iter().sum::<f64>() < 1e-14 {
            break;
        }
        mass = next;
    }
    let total: f64 = visits.iter().sum();
    visits.iter().map(|v| v / total).collect()
}

/// Small hand-written corpus behind the golden DOT file.
pub fn golden_corpus() -> Corpus {
    let space = StateSpace::new(["ER", "PO", "RX"]).unwrap();
    let rows: [(&[&str], &[f64]); 6] = [
        (&["RX", "RX", "RX", "PO", "RX"], &[0.0, 1.0, 2.5, 3.0, 4.0]),
        (&["RX", "RX", "RX", "RX"], &[0.0, 1.5, 3.0, 4.5]),
        (&["PO", "RX", "RX", "PO"], &[0.0, 0.5, 2.0, 5.0]),
        (&["ER", "PO", "RX", "RX", "RX"], &[0.0, 0.1, 1.0, 2.0, 3.2]),
        (&["RX", "PO", "PO", "RX", "RX", "RX"], &[0.0, 2.0, 6.0, 7.0, 8.5, 10.0]),
        (&["RX", "RX"], &[0.0, 1.0]),
    ];
    let seqs = rows
        .iter()
        .enumerate()
        .map(|(k, (ev, t))| {
            EventSequence::from_labels(format!("g{k}"), ev.iter().copied().zip(t.iter().copied()), &space).unwrap()
        })
        .collect();
    Corpus::new(space, seqs).unwrap()
}
