use std::fmt;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;

use mrp_profiles::bench::{run_scaling, BenchConfig, DESK_SIZES, LARGE_SIZES};
use mrp_profiles::clustering::{divisive_cluster, ClusterConfig};
use mrp_profiles::designs;
use mrp_profiles::ingest::{
    read_records, read_sequences, read_subjects, simulate_mixture, simulate_records, translate as run_translate,
    write_labels, write_records, write_sequences, GeneratorSpec, MappingConfig, NoiseConfig,
};
use mrp_profiles::model::{Corpus, LogParams, StateSpace};
use mrp_profiles::netviz::{
    build_network_from, emit_dot, volume_rows, write_volume_table, NetworkConfig,
};
use mrp_profiles::report::FitReport;

use crate::{AssignArgs, BenchArgs, Design, FitArgs, RenderArgs, SimulateArgs, TranslateArgs};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug)]
pub enum CliError {
    /// Bad input files, configs or flag values.
    Input(String),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Internal(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) | CliError::Internal(m) => f.write_str(m),
        }
    }
}

impl From<mrp_profiles::Error> for CliError {
    fn from(e: mrp_profiles::Error) -> Self {
        if e.is_input_error() {
            CliError::Input(e.to_string())
        } else {
            CliError::Internal(e.to_string())
        }
    }
}

type CliResult<T = ()> = Result<T, CliError>;

fn input_err(path: &Path, e: impl fmt::Display) -> CliError {
    CliError::Input(format!("{}: {e}", path.display()))
}

fn output_err(path: &Path, e: impl fmt::Display) -> CliError {
    CliError::Internal(format!("{}: {e}", path.display()))
}

fn open_input(path: &Path) -> CliResult<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| input_err(path, e))
}

/// Wraps a core error raised while reading `path`.
fn in_file(path: &Path) -> impl Fn(mrp_profiles::Error) -> CliError + '_ {
    move |e| {
        if e.is_input_error() {
            input_err(path, e)
        } else {
            output_err(path, e)
        }
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<T> {
    serde_json::from_reader(open_input(path)?).map_err(|e| input_err(path, e))
}

struct OutDir(PathBuf);

impl OutDir {
    fn create(path: &Path) -> CliResult<Self> {
        fs::create_dir_all(path).map_err(|e| output_err(path, e))?;
        Ok(Self(path.to_path_buf()))
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.join(name)
    }

    fn write_with<F>(&self, name: &str, f: F) -> CliResult<PathBuf>
    where
        F: FnOnce(&mut BufWriter<File>) -> mrp_profiles::Result<()>,
    {
        let path = self.path(name);
        let file = File::create(&path).map_err(|e| output_err(&path, e))?;
        let mut w = BufWriter::new(file);
        f(&mut w).map_err(|e| output_err(&path, e))?;
        w.flush().map_err(|e| output_err(&path, e))?;
        Ok(path)
    }

    fn write_text(&self, name: &str, text: &str) -> CliResult<PathBuf> {
        self.write_with(name, |w| Ok(w.write_all(text.as_bytes())?))
    }

    fn write_json<T: Serialize>(&self, name: &str, value: &T) -> CliResult<PathBuf> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Internal(e.to_string()))?;
        text.push('\n');
        self.write_text(name, &text)
    }

    /// Sidecar describing how the other files in the directory were made.
    fn manifest(&self, command: &str, seed: Option<u64>, config: serde_json::Value, outputs: &[PathBuf]) -> CliResult {
        let names: Vec<String> = outputs
            .iter()
            .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
            .collect();
        let manifest = json!({
            "tool": "mrpprof",
            "version": VERSION,
            "command": command,
            "seed": seed,
            "config": config,
            "outputs": names,
        });
        self.write_json("manifest.json", &manifest)?;
        Ok(())
    }
}

fn to_value<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).unwrap_or(serde_json::Value::Null)
}

pub fn init_threads(threads: Option<usize>) -> CliResult {
    match threads {
        None => Ok(()),
        Some(0) => Err(CliError::Input("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Internal(e.to_string())),
    }
}

fn load_spec(config: Option<&Path>, design: Design, seed: u64) -> CliResult<GeneratorSpec> {
    let mut spec = match config {
        Some(path) => read_json::<GeneratorSpec>(path)?,
        None => match design {
            Design::Homogeneous => designs::homogeneous(seed),
            Design::Two => designs::two_profiles(seed),
            Design::Four => designs::four_profiles(seed),
        },
    };
    spec.seed = seed;
    spec.validate()?;
    Ok(spec)
}

pub fn simulate(a: SimulateArgs) -> CliResult {
    let spec = load_spec(a.config.as_deref(), a.design, a.seed)?;
    let out = OutDir::create(&a.output_dir)?;
    let mut outputs = Vec::new();
    let noise = NoiseConfig {
        duplicate_rate: a.duplicate_rate,
        off_allowlist_rate: a.off_allowlist_rate,
    };

    let sim = match &a.mapping {
        Some(path) => {
            let mapping: MappingConfig = read_json(path)?;
            mapping.validate().map_err(in_file(path))?;
            let rec = simulate_records(&spec, &mapping, a.subjects, &noise)?;
            outputs.push(out.write_with("records.csv", |w| write_records(w, &rec.records))?);
            log::info!(
                "{} records ({} duplicates, {} off-allowlist injected)",
                rec.records.len(),
                rec.injected_duplicates,
                rec.injected_off_allowlist
            );
            rec.truth
        }
        None => simulate_mixture(&spec, a.subjects)?,
    };
    outputs.push(out.write_with("sequences.jsonl", |w| write_sequences(w, &sim.sequences, &sim.space))?);
    outputs.push(out.write_with("labels.csv", |w| write_labels(w, &sim.sequences, &sim.labels))?);
    outputs.push(out.write_json("generator.json", &spec)?);
    out.manifest(
        "simulate",
        Some(a.seed),
        json!({ "subjects": a.subjects, "generator": to_value(&spec), "noise": to_value(&noise) }),
        &outputs,
    )?;
    let events: usize = sim.sequences.iter().map(|s| s.len()).sum();
    println!("{} subjects, {} events", sim.sequences.len(), events);
    Ok(())
}

pub fn translate(a: TranslateArgs) -> CliResult {
    let mapping: MappingConfig = read_json(&a.config)?;
    let space = mapping.validate().map_err(in_file(&a.config))?;
    let records = read_records(open_input(&a.input)?).map_err(in_file(&a.input))?;
    let subjects = match &a.subjects {
        Some(path) => Some(read_subjects(open_input(path)?).map_err(in_file(path))?),
        None => None,
    };
    let tr = run_translate(&records, &mapping, subjects.as_ref())?;

    let out = OutDir::create(&a.output_dir)?;
    let outputs = vec![
        out.write_with("sequences.jsonl", |w| write_sequences(w, &tr.sequences, &space))?,
        out.write_json("drop_report.json", &tr.report)?,
    ];
    out.manifest(
        "translate",
        None,
        json!({ "input": a.input.display().to_string(), "mapping": to_value(&mapping) }),
        &outputs,
    )?;
    let events: usize = tr.sequences.iter().map(|s| s.len()).sum();
    let r = &tr.report;
    println!("{} subjects, {} events", tr.sequences.len(), events);
    println!(
        "records: {} in, {} mapped, {} dropped (window {}, diagnosis {}, drug {}, unmapped {}, duplicate {}, age {}, eligibility {})",
        r.records_in,
        r.records_mapped,
        r.records_dropped(),
        r.outside_window,
        r.diagnosis_not_allowed,
        r.drug_not_allowed,
        r.unmapped,
        r.duplicate,
        r.age_out_of_range,
        r.ineligible_subject
    );
    Ok(())
}

/// Contents of `fit --config`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    pub labels: Option<Vec<String>>,
    pub clustering: ClusterConfig,
    pub network: NetworkConfig,
}

fn read_corpus(path: &Path, space: &StateSpace) -> CliResult<Corpus> {
    let seqs = read_sequences(open_input(path)?, space).map_err(in_file(path))?;
    Corpus::new(space.clone(), seqs).map_err(in_file(path))
}

fn write_networks(
    out: &OutDir,
    report: &FitReport,
    space: &StateSpace,
    net: &NetworkConfig,
) -> CliResult<Vec<PathBuf>> {
    let mut outputs = Vec::new();
    let mut rows = Vec::new();
    for p in &report.profiles {
        let graph = build_network_from(&p.params, &p.visits, space, net);
        let name = format!("profile_{}", p.profile);
        let mut dot = format!(
            "// mrpprof {VERSION}, seed {}, {} members, coverage threshold {}, edge_min {}\n",
            report.seed, p.size, net.coverage, net.edge_min
        );
        dot.push_str(&emit_dot(&graph, &name, &net.tiers));
        outputs.push(out.write_text(&format!("{name}.dot"), &dot)?);
        rows.extend(volume_rows(p.profile, &p.visits, p.size, space));
    }
    outputs.push(out.write_with("volumes.csv", |w| write_volume_table(&rows, w))?);
    Ok(outputs)
}

pub fn fit(a: FitArgs) -> CliResult {
    let mut cfg: FitConfig = match &a.config {
        Some(path) => read_json(path)?,
        None => FitConfig::default(),
    };
    if let Some(labels) = a.labels {
        cfg.labels = Some(labels);
    }
    if let Some(n) = a.n_thresholds {
        cfg.clustering.n_thresholds = n;
    }
    if let Some(n) = a.min_leaf {
        cfg.clustering.min_leaf = Some(n);
    }
    if let Some(n) = a.max_profiles {
        cfg.clustering.max_profiles = n;
    }
    if let Some(c) = a.coverage {
        cfg.network.coverage = c;
    }
    if let Some(e) = a.edge_min {
        cfg.network.edge_min = e;
    }
    cfg.clustering.validate()?;
    cfg.network.validate()?;
    let space = match &cfg.labels {
        Some(labels) => StateSpace::new(labels.clone())?,
        None => StateSpace::provider_types(),
    };

    let corpus = read_corpus(&a.input, &space)?;
    log::info!("fitting {} subjects over {} states", corpus.len(), space.len());
    let tree = divisive_cluster(&corpus, &cfg.clustering, a.seed)?;
    let mut report = FitReport::from_tree(&tree, &corpus);
    report.run.insert("tool_version".into(), VERSION.into());
    report.run.insert("input".into(), a.input.display().to_string());
    report.run.insert(
        "network".into(),
        serde_json::to_string(&cfg.network).map_err(|e| CliError::Internal(e.to_string()))?,
    );

    let out = OutDir::create(&a.output_dir)?;
    let mut outputs = vec![out.write_with("fit_report.json", |w| report.write(w))?];
    outputs.extend(write_networks(&out, &report, &space, &cfg.network)?);
    let summary = report.summary();
    outputs.push(out.write_text("summary.txt", &summary)?);
    out.manifest("fit", Some(a.seed), to_value(&cfg), &outputs)?;
    print!("{summary}");
    Ok(())
}

pub fn assign(a: AssignArgs) -> CliResult {
    let report = FitReport::read(open_input(&a.report)?).map_err(in_file(&a.report))?;
    let space = report.space().map_err(in_file(&a.report))?;
    let seqs = read_sequences(open_input(&a.input)?, &space).map_err(in_file(&a.input))?;
    let scorers: Vec<LogParams> = report
        .profiles
        .iter()
        .map(|p| LogParams::new(&p.params, report.config.prob_floor))
        .collect();

    let mut text = String::new();
    for seq in &seqs {
        let lls: Vec<f64> = scorers.iter().map(|s| s.score(seq)).collect();
        let mut best = 0;
        for (k, &ll) in lls.iter().enumerate() {
            if ll > lls[best] {
                best = k;
            }
        }
        text.push_str(seq.subject_id());
        text.push(',');
        text.push_str(&report.profiles[best].profile.to_string());
        for ll in &lls {
            text.push_str(&format!(",{ll:.6}"));
        }
        text.push('\n');
    }
    match &a.output {
        Some(path) => fs::write(path, text).map_err(|e| output_err(path, e))?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| CliError::Internal(e.to_string()))?;
        }
    }
    Ok(())
}

pub fn render(a: RenderArgs) -> CliResult {
    let report = FitReport::read(open_input(&a.input)?).map_err(in_file(&a.input))?;
    let space = report.space().map_err(in_file(&a.input))?;
    let mut net: NetworkConfig = match report.run.get("network") {
        Some(s) => serde_json::from_str(s).map_err(|e| input_err(&a.input, e))?,
        None => NetworkConfig::default(),
    };
    if let Some(c) = a.coverage {
        net.coverage = c;
    }
    if let Some(e) = a.edge_min {
        net.edge_min = e;
    }
    net.validate()?;
    let out = OutDir::create(&a.output_dir)?;
    let outputs = write_networks(&out, &report, &space, &net)?;
    out.manifest(
        "render",
        Some(report.seed),
        json!({ "input": a.input.display().to_string(), "network": to_value(&net) }),
        &outputs,
    )?;
    println!("{} networks written", report.profiles.len());
    Ok(())
}

pub fn bench(a: BenchArgs, threads: Option<usize>) -> CliResult {
    let spec = load_spec(a.config.as_deref(), a.design, a.seed)?;
    let sizes = match a.sizes {
        Some(s) => s,
        None if a.large => LARGE_SIZES.to_vec(),
        None => DESK_SIZES.to_vec(),
    };
    let cfg = BenchConfig {
        sizes,
        reps: a.reps,
        threads: threads.unwrap_or(1),
        ..BenchConfig::default()
    };
    let report = run_scaling(&spec, &cfg)?;
    let out = OutDir::create(&a.output_dir)?;
    let outputs = vec![
        out.write_with("bench.csv", |w| report.write_csv(w))?,
        out.write_json("bench_summary.json", &report)?,
    ];
    out.manifest(
        "bench",
        Some(a.seed),
        json!({ "bench": to_value(&cfg), "generator": to_value(&spec) }),
        &outputs,
    )?;
    for s in &report.sizes {
        println!("R={:>8}  total {:.4}s", s.n_subjects, s.median_seconds["total"]);
    }
    println!("log-log slope {:.3}", report.total_slope());
    for (w, r) in cfg.sizes.windows(2).zip(&report.doubling_ratios) {
        println!("time ratio {} -> {}: {:.3}", w[0], w[1], r);
    }
    Ok(())
}
