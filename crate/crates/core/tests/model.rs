mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;
use mrp_profiles::ingest::{simulate_mixture, GeneratorProfile, GeneratorSpec, GENERATOR_SCHEMA};
use mrp_profiles::model::*;

fn space3() -> StateSpace {
    StateSpace::new(["A", "B", "C"]).unwrap()
}

#[test]
fn likelihood_matches_brute_force() {
    let space = space3();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for round in 0..200 {
        let (p, rates) = random_params(&mut rng, 3, 1.0);
        let params = to_params(&p, &rates);
        let n = rng.random_range(1..=10);
        let mut seqs = Vec::new();
        let mut expected_total = 0.0;
        for k in 0..n {
            let (events, times) = random_events(&mut rng, 3, 8);
            let expected = brute_force_loglik(&events, &times, &p, &rates);
            let seq = EventSequence::new(format!("r{round}s{k}"), events, times, &space).unwrap();
            let got = sequence_log_likelihood(&seq, &params);
            worst = worst.max((got - expected).abs());
            expected_total += expected;
            seqs.push(seq);
        }
        let batch = batch_log_likelihood(&seqs, &params);
        worst = worst.max((batch - expected_total).abs());
        let stats = accumulate_stats(&seqs, &space).unwrap();
        worst = worst.max((stats_log_likelihood(&stats, &params) - expected_total).abs());
    }
    assert!(worst < 1e-8, "max deviation {worst}");
}

#[test]
fn likelihood_floors_zero_probabilities() {
    let space = StateSpace::new(["A", "B"]).unwrap();
    let p = vec![vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0], vec![1.0, 0.0, 0.0]];
    let rates = vec![vec![1.0, 1.0], vec![1.0, 1.0]];
    let params = to_params(&p, &rates);
    let seq = EventSequence::from_labels("x", [("B", 0.0)], &space).unwrap();
    let expected = brute_force_loglik(&[1], &[0.0], &p, &rates);
    assert!((sequence_log_likelihood(&seq, &params) - expected).abs() < 1e-12);
    assert!((expected - FLOOR.ln()).abs() < 1e-12);
}

#[test]
fn censoring_invariance() {
    let space = space3();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (p, rates) = random_params(&mut rng, 3, 1.0);
    let params = to_params(&p, &rates);
    let (p2, rates2) = random_params(&mut rng, 3, 1.0);
    let other = to_params(&p2, &rates2);
    for _ in 0..500 {
        let (events, times) = random_events(&mut rng, 3, 8);
        let seq = EventSequence::new("x", events, times.clone(), &space).unwrap();
        let l = times.len();
        let mut moved = times.clone();
        // Shift the first arrival earlier and the last one later.
        moved[0] -= rng.random_range(0.0..10.0);
        if l > 1 {
            moved[l - 1] += rng.random_range(0.0..10.0);
        }
        let seq2 = seq.with_times(moved, &space).unwrap();
        assert_eq!(sequence_log_likelihood(&seq, &params), sequence_log_likelihood(&seq2, &params));
        let profiles = [params.clone(), other.clone()];
        assert_eq!(posterior_assign(&seq, &profiles), posterior_assign(&seq2, &profiles));
        let a = SufficientStats::from_sequence(&seq, 3);
        let b = SufficientStats::from_sequence(&seq2, 3);
        assert_eq!(a, b);
    }
}

fn one_profile(p: Vec<Vec<f64>>, rates: Vec<Vec<f64>>, seed: u64) -> GeneratorSpec {
    GeneratorSpec {
        schema: GENERATOR_SCHEMA.into(),
        labels: vec!["A".into(), "B".into(), "C".into()],
        profiles: vec![GeneratorProfile {
            name: "only".into(),
            weight: 1.0,
            params: MrpParams::new(p, rates).unwrap(),
        }],
        study_days: 365_000,
        start_spread_days: 0,
        max_events: None,
        seed,
    }
}

fn recovery_truth() -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let p = vec![
        vec![0.2, 0.5, 0.2, 0.1],
        vec![0.3, 0.3, 0.3, 0.1],
        vec![0.5, 0.1, 0.3, 0.1],
        vec![0.6, 0.3, 0.1, 0.0],
    ];
    // Mean interarrivals between 1 and 6 months so that day rounding stays
    // well below the tolerance.
    let rates = vec![
        vec![1.0 / 2.0, 1.0 / 4.0, 1.0 / 6.0],
        vec![1.0 / 3.0, 1.0, 1.0 / 2.5],
        vec![1.0 / 5.0, 1.0 / 1.5, 1.0 / 2.0],
    ];
    (p, rates)
}

/// (max |P - P*|, max relative mean-interarrival error) from `n` sequences.
fn recovery_errors(n: usize, seed: u64) -> (f64, f64) {
    let (p, rates) = recovery_truth();
    let sim = simulate_mixture(&one_profile(p.clone(), rates.clone(), seed), n).unwrap();
    let stats = accumulate_stats(&sim.sequences, &sim.space).unwrap();
    let fit = estimate_mle(&stats, None, &EstimationConfig::default());
    let mut p_err = 0.0f64;
    for (i, row) in p.iter().enumerate() {
        for (j, &truth) in row.iter().enumerate() {
            p_err = p_err.max((fit.p(i, j) - truth).abs());
        }
    }
    let mut m_err = 0.0f64;
    for i in 0..3 {
        for j in 0..3 {
            let truth = 1.0 / rates[i][j];
            m_err = m_err.max((fit.mean_interarrival(i, j) - truth).abs() / truth);
        }
    }
    (p_err, m_err)
}

#[test]
fn mle_recovers_generator() {
    let (p_err, m_err) = recovery_errors(10_000, 1);
    assert!(p_err < 0.02, "max |P - P*| = {p_err}");
    assert!(m_err < 0.05, "mean interarrival relative error = {m_err}");
}

#[test]
fn mle_errors_shrink_with_n() {
    // Averaged over a few seeds so a lucky small sample cannot break the order.
    let avg = |n: usize| {
        let runs: Vec<(f64, f64)> = (0..5).map(|s| recovery_errors(n, 100 + s)).collect();
        let k = runs.len() as f64;
        (
            runs.iter().map(|r| r.0).sum::<f64>() / k,
            runs.iter().map(|r| r.1).sum::<f64>() / k,
        )
    };
    let e = [avg(100), avg(1_000), avg(10_000)];
    assert!(e[0].0 > e[1].0 && e[1].0 > e[2].0, "P errors {e:?}");
    assert!(e[0].1 > e[1].1 && e[1].1 > e[2].1, "rate errors {e:?}");
}

#[test]
fn kl_matches_monte_carlo() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for pair in 0..20 {
        let s = 2 + pair % 4;
        let a = random_params(&mut rng, s, 1.0);
        let b = random_params(&mut rng, s, 1.0);
        let i = pair % s;
        let closed = kl_transition_distribution(i, &to_params(&a.0, &a.1), &to_params(&b.0, &b.1));
        let (mc, se) = monte_carlo_kl(&mut rng, i, (&a.0, &a.1), (&b.0, &b.1), 1_000_000);
        assert!(
            (closed - mc).abs() <= 3.0 * se,
            "pair {pair}: closed {closed} vs mc {mc} +- {se}"
        );
    }
}

#[test]
fn kl_is_non_negative() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut violations = 0;
    for k in 0..10_000 {
        let s = 1 + k % 6;
        let shape = [0.05, 0.5, 1.0, 5.0][k % 4];
        let a = random_params(&mut rng, s, shape);
        let b = random_params(&mut rng, s, shape);
        let (pa, pb) = (to_params(&a.0, &a.1), to_params(&b.0, &b.1));
        for i in 0..s {
            if kl_transition_distribution(i, &pa, &pb) < -1e-12 {
                violations += 1;
            }
        }
        if kl_transition_distribution(0, &pa, &pa).abs() > 1e-12 {
            violations += 1;
        }
    }
    assert_eq!(violations, 0);
}

#[test]
fn exponential_kl_closed_form() {
    // ln(a/b) + b/a - 1
    assert!((kl_exponential(1.0, 2.0) - (0.5f64.ln() + 1.0)).abs() < 1e-12);
    assert!((kl_exponential(2.0, 1.0) - (2.0f64.ln() - 0.5)).abs() < 1e-12);
    assert_eq!(kl_exponential(3.0, 3.0), 0.0);
}
