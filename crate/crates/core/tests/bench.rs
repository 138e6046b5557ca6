use mrp_profiles::bench::*;
use mrp_profiles::clustering::ClusterConfig;
use mrp_profiles::designs;

fn small() -> BenchConfig {
    BenchConfig {
        sizes: vec![200, 400, 800],
        reps: 1,
        threads: 1,
        cluster: ClusterConfig::default(),
    }
}

#[test]
fn repeated_runs_do_identical_work() {
    let spec = designs::two_profiles(3);
    let a = run_scaling(&spec, &small()).unwrap();
    let b = run_scaling(&spec, &small()).unwrap();
    for (x, y) in a.sizes.iter().zip(&b.sizes) {
        assert_eq!(x.n_subjects, y.n_subjects);
        assert_eq!(x.n_events, y.n_events);
        assert_eq!(x.n_transitions, y.n_transitions);
        assert_eq!(x.em_iterations, y.em_iterations);
    }
}

#[test]
fn report_shape() {
    let report = run_scaling(&designs::two_profiles(1), &small()).unwrap();
    assert_eq!(report.sizes.len(), 3);
    assert_eq!(report.doubling_ratios.len(), 2);
    for s in &report.sizes {
        // One transition per event plus the exit to RC.
        assert_eq!(s.n_transitions, s.n_events + s.n_subjects as u64);
        for stage in STAGES {
            assert!(s.median_seconds[stage] >= 0.0);
        }
        assert!(s.median_seconds["total"] > 0.0);
    }
    // Nested prefixes: the work can only grow with R.
    assert!(report.sizes.windows(2).all(|w| w[1].n_events > w[0].n_events));
    assert!(report.total_slope().is_finite());

    let mut csv = Vec::new();
    report.write_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert_eq!(text.lines().next(), Some("R,stage,median_seconds"));
    assert_eq!(text.lines().count(), 1 + 3 * STAGES.len());
}

#[test]
fn sizes_must_increase() {
    let cfg = BenchConfig {
        sizes: vec![400, 200],
        ..small()
    };
    assert!(run_scaling(&designs::two_profiles(1), &cfg).is_err());
    let cfg = BenchConfig {
        sizes: vec![],
        ..small()
    };
    assert!(run_scaling(&designs::two_profiles(1), &cfg).is_err());
}
