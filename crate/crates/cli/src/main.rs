//! `mrpprof`: simulate, translate, fit, assign, render and bench.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "mrpprof", version, about = "Markov renewal process profiles for event sequences")]
struct Cli {
    /// Worker threads for parallel folds (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Only log warnings and errors.
    #[arg(long, short, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a planted mixture: sequences, true labels and optionally records.
    Simulate(SimulateArgs),
    /// Translate claim records into event sequences.
    Translate(TranslateArgs),
    /// Fit profiles to a sequence file.
    Fit(FitArgs),
    /// Score sequences against a saved fit report.
    Assign(AssignArgs),
    /// Render DOT networks and the volume table from a saved fit report.
    Render(RenderArgs),
    /// Time one outer iteration over increasing corpus sizes.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Design {
    Homogeneous,
    Two,
    Four,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Generator spec JSON; a built-in design is used when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "two")]
    design: Design,
    /// Number of subjects.
    #[arg(long, short = 'n', default_value_t = 2000)]
    subjects: usize,
    #[arg(long)]
    seed: u64,
    /// Mapping config; when given, dated claim records are written too.
    #[arg(long)]
    mapping: Option<PathBuf>,
    /// Probability that a record is duplicated.
    #[arg(long, default_value_t = 0.0)]
    duplicate_rate: f64,
    /// Per-event probability of an extra off-allowlist record.
    #[arg(long, default_value_t = 0.0)]
    off_allowlist_rate: f64,
    #[arg(long)]
    output_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct TranslateArgs {
    /// Claim records CSV.
    #[arg(long)]
    input: PathBuf,
    /// Mapping config JSON.
    #[arg(long)]
    config: PathBuf,
    /// Optional CSV of subject_id,birth_date enabling the age filters.
    #[arg(long)]
    subjects: Option<PathBuf>,
    #[arg(long)]
    output_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Sequences in JSON Lines.
    #[arg(long)]
    input: PathBuf,
    /// Fit config JSON (labels, clustering and network knobs).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated event labels (default: CL,ER,HO,NP,PO,RX).
    #[arg(long, value_delimiter = ',')]
    labels: Option<Vec<String>>,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    n_thresholds: Option<usize>,
    #[arg(long)]
    min_leaf: Option<usize>,
    #[arg(long)]
    max_profiles: Option<usize>,
    /// Share of visit volume kept in each network.
    #[arg(long)]
    coverage: Option<f64>,
    #[arg(long)]
    edge_min: Option<f64>,
    #[arg(long)]
    output_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct AssignArgs {
    /// Sequences in JSON Lines.
    #[arg(long)]
    input: PathBuf,
    /// Fit report produced by `fit`.
    #[arg(long)]
    report: PathBuf,
    /// Output CSV; standard output when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    /// Fit report produced by `fit`.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    coverage: Option<f64>,
    #[arg(long)]
    edge_min: Option<f64>,
    #[arg(long)]
    output_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Generator spec JSON; a built-in design is used when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "two")]
    design: Design,
    #[arg(long)]
    seed: u64,
    /// Comma-separated corpus sizes (default 1000..16000 by doubling).
    #[arg(long, value_delimiter = ',', conflicts_with = "large")]
    sizes: Option<Vec<usize>>,
    /// Use 100K..1.5M subjects.
    #[arg(long)]
    large: bool,
    #[arg(long, default_value_t = 3)]
    reps: usize,
    #[arg(long)]
    output_dir: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet { "warn" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();

    let result = commands::init_threads(cli.threads).and_then(|_| match cli.command {
        Command::Simulate(a) => commands::simulate(a),
        Command::Translate(a) => commands::translate(a),
        Command::Fit(a) => commands::fit(a),
        Command::Assign(a) => commands::assign(a),
        Command::Render(a) => commands::render(a),
        Command::Bench(a) => commands::bench(a, cli.threads),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
