//! Runtime of one outer iteration of the divisive search versus corpus size.
//!
//! One iteration is: null fit, KL distances, sort, threshold search and EM
//! refinement of the best candidate. Each stage is timed separately; the
//! report carries per-stage medians, fitted log-log slopes and the ratio of
//! total time between consecutive sizes.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::clustering::{
    em_refine, fit_null, kl_distances, search_split, sort_ranked, BicContext, ClusterConfig,
};
use crate::ingest::{simulate_mixture, GeneratorSpec};
use crate::model::Corpus;
use crate::{Error, Result};

pub const DESK_SIZES: [usize; 5] = [1_000, 2_000, 4_000, 8_000, 16_000];
pub const LARGE_SIZES: [usize; 5] = [100_000, 300_000, 500_000, 1_000_000, 1_500_000];

pub const STAGES: [&str; 6] = ["null_fit", "kl_distance", "sort", "split_search", "em_refine", "total"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub sizes: Vec<usize>,
    pub reps: usize,
    /// Worker threads; 1 gives a clean single-threaded measurement.
    pub threads: usize,
    pub cluster: ClusterConfig,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            sizes: DESK_SIZES.to_vec(),
            reps: 3,
            threads: 1,
            cluster: ClusterConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MachineInfo {
    pub os: String,
    pub arch: String,
    pub cpus: usize,
    pub cpu_model: Option<String>,
}

impl MachineInfo {
    pub fn detect() -> Self {
        let cpu_model = std::fs::read_to_string("/proc/cpuinfo").ok().and_then(|s| {
            s.lines()
                .find(|l| l.starts_with("model name"))
                .and_then(|l| l.split(':').nth(1))
                .map(|m| m.trim().to_string())
        });
        Self {
            os: std::env::consts::OS.into(),
            arch: std::env::consts::ARCH.into(),
            cpus: std::thread::available_parallelism().map_or(1, |n| n.get()),
            cpu_model,
        }
    }
}

/// Work and timings of one iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRun {
    pub n_subjects: usize,
    pub n_events: u64,
    pub n_transitions: u64,
    pub thresholds_evaluated: usize,
    pub em_iterations: usize,
    pub seconds: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeResult {
    pub n_subjects: usize,
    pub n_events: u64,
    pub n_transitions: u64,
    pub em_iterations: usize,
    /// Median seconds per stage over the repetitions.
    pub median_seconds: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub seed: u64,
    pub threads: usize,
    pub reps: usize,
    pub machine: MachineInfo,
    pub sizes: Vec<SizeResult>,
    /// Least-squares slope of log(median seconds) on log(R), per stage.
    pub slopes: BTreeMap<String, f64>,
    /// Total time at size k+1 over total time at size k.
    pub doubling_ratios: Vec<f64>,
}

impl BenchReport {
    pub fn total_slope(&self) -> f64 {
        self.slopes["total"]
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["R", "stage", "median_seconds"])?;
        for size in &self.sizes {
            for stage in STAGES {
                w.write_record([
                    size.n_subjects.to_string(),
                    stage.to_string(),
                    format!("{:.9}", size.median_seconds[stage]),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Times one outer iteration on `corpus`.
pub fn time_iteration(corpus: &Corpus, cfg: &ClusterConfig) -> Result<IterationRun> {
    let mut seconds = BTreeMap::new();
    let start = Instant::now();

    let t = Instant::now();
    let null = fit_null(corpus, cfg)?;
    seconds.insert("null_fit".to_string(), t.elapsed().as_secs_f64());

    let t = Instant::now();
    let mut ranked = kl_distances(&null, corpus, cfg);
    seconds.insert("kl_distance".to_string(), t.elapsed().as_secs_f64());

    let t = Instant::now();
    sort_ranked(&mut ranked);
    seconds.insert("sort".to_string(), t.elapsed().as_secs_f64());

    let ctx = BicContext {
        total_loglik: null.loglik,
        n_profiles: 1,
        n_subjects: corpus.len(),
        n_states: corpus.space().len(),
    };
    let t = Instant::now();
    let candidate = search_split(&null, corpus, &ranked, &ctx, cfg);
    seconds.insert("split_search".to_string(), t.elapsed().as_secs_f64());

    let t = Instant::now();
    let (thresholds_evaluated, em_iterations) = match candidate {
        Some(c) => {
            let evaluated = c.evaluated;
            let out = em_refine(&null, c.below, c.above, corpus, &ctx, cfg);
            (evaluated, out.iterations)
        }
        None => (0, 0),
    };
    seconds.insert("em_refine".to_string(), t.elapsed().as_secs_f64());
    seconds.insert("total".to_string(), start.elapsed().as_secs_f64());

    let n_events = null.stats.total_events();
    Ok(IterationRun {
        n_subjects: corpus.len(),
        n_events,
        n_transitions: n_events + corpus.len() as u64,
        thresholds_evaluated,
        em_iterations,
        seconds,
    })
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Least-squares slope of `ln y` on `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.max(1e-12).ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Simulates the largest corpus once and times nested prefixes of it.
pub fn run_scaling(spec: &GeneratorSpec, cfg: &BenchConfig) -> Result<BenchReport> {
    if cfg.sizes.is_empty() || cfg.sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config("bench sizes must be non-empty and strictly increasing".into()));
    }
    if cfg.reps == 0 || cfg.threads == 0 {
        return Err(Error::Config("reps and threads must be positive".into()));
    }
    cfg.cluster.validate()?;
    let largest = *cfg.sizes.last().expect("non-empty");
    let sim = simulate_mixture(spec, largest)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;

    let mut sizes = Vec::with_capacity(cfg.sizes.len());
    for &r in &cfg.sizes {
        let corpus = Corpus::new(sim.space.clone(), sim.sequences[..r].to_vec())?;
        let mut runs = Vec::with_capacity(cfg.reps);
        for _ in 0..cfg.reps {
            runs.push(pool.install(|| time_iteration(&corpus, &cfg.cluster))?);
        }
        let median_seconds = STAGES
            .iter()
            .map(|&stage| {
                let xs = runs.iter().map(|run| run.seconds[stage]).collect();
                (stage.to_string(), median(xs))
            })
            .collect();
        log::info!("bench R={r}: total {:.4}s", median(runs.iter().map(|x| x.seconds["total"]).collect()));
        sizes.push(SizeResult {
            n_subjects: r,
            n_events: runs[0].n_events,
            n_transitions: runs[0].n_transitions,
            em_iterations: runs[0].em_iterations,
            median_seconds,
        });
    }

    let xs: Vec<f64> = sizes.iter().map(|s| s.n_subjects as f64).collect();
    let slopes = STAGES
        .iter()
        .map(|&stage| {
            let ys: Vec<f64> = sizes.iter().map(|s| s.median_seconds[stage]).collect();
            (stage.to_string(), if sizes.len() > 1 { log_log_slope(&xs, &ys) } else { f64::NAN })
        })
        .collect();
    let doubling_ratios = sizes
        .windows(2)
        .map(|w| w[1].median_seconds["total"] / w[0].median_seconds["total"])
        .collect();

    Ok(BenchReport {
        seed: spec.seed,
        threads: cfg.threads,
        reps: cfg.reps,
        machine: MachineInfo::detect(),
        sizes,
        slopes,
        doubling_ratios,
    })
}
