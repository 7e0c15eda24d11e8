mod oracle;

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dsscn::config::EngineConfig;
use dsscn::harness::{
    self, dataset_preset, summarize, summary_json, summary_text, Protocol, RunConfig, RunReport, DATASET_PRESETS,
};
use dsscn::stack::StackedNetwork;
use dsscn::stream::{write_labeled_csv, HyperplaneGenerator, HyperplaneParams, SeaGenerator, SeaParams, StreamSource};

#[derive(Parser)]
#[command(
    name = "dsscn",
    version,
    about = "Evolving stacked classifier for drifting data streams"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic labelled stream to CSV.
    Generate(GenerateArgs),
    /// Run a test protocol over a stream.
    Run(Box<RunArgs>),
    /// Summarise a saved model (JSON) or a trace (CSV).
    Inspect(InspectArgs),
    /// Compare the engine against an independent reference computation.
    Oracle(OracleArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Sea,
    Hyperplane,
}

#[derive(Args)]
struct GenerateArgs {
    kind: Kind,
    #[arg(long)]
    samples: Option<usize>,
    /// SEA: samples per concept.
    #[arg(long)]
    drift_every: Option<usize>,
    /// SEA: thresholds visited in turn.
    #[arg(long, value_delimiter = ',', default_values_t = [4.0, 7.0])]
    thetas: Vec<f64>,
    /// Hyperplane: sample index where the second concept starts mixing in.
    #[arg(long)]
    drift_start: Option<usize>,
    /// Hyperplane: length of the mixing ramp.
    #[arg(long)]
    drift_span: Option<usize>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProtocolArg {
    Holdout,
    Prequential,
}

#[derive(Args)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["data", "dataset"])))]
struct RunArgs {
    /// Labelled CSV stream.
    #[arg(long)]
    data: Option<PathBuf>,
    /// 0-based label column of --data (default: last).
    #[arg(long, requires = "data")]
    label_column: Option<usize>,
    /// Built-in stream preset.
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(DATASET_PRESETS))]
    dataset: Option<String>,
    #[arg(long, value_enum, default_value_t = ProtocolArg::Prequential)]
    protocol: ProtocolArg,
    #[arg(long)]
    chunk: Option<usize>,
    #[arg(long)]
    train_fraction: Option<f64>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Number of consecutive seeds to run, starting at --seed.
    #[arg(long, default_value_t = 1)]
    seeds: u64,
    /// Worker threads for multi-seed sweeps.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Stop updating the model after this many stamps.
    #[arg(long)]
    freeze_after: Option<usize>,
    /// TOML file with dotted-key overrides such as `stack.alpha = 0.5`.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Single override, `section.key=value`; applied after --config.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    trace_out: Option<PathBuf>,
    #[arg(long)]
    summary_out: Option<PathBuf>,
    #[arg(long)]
    json_out: Option<PathBuf>,
    #[arg(long)]
    scopes_out: Option<PathBuf>,
    #[arg(long)]
    timings_out: Option<PathBuf>,
    /// Save the final model as JSON (single-seed runs only).
    #[arg(long)]
    model_out: Option<PathBuf>,
    /// Print only the summary block, without the config header.
    #[arg(long)]
    quiet: bool,
}

#[derive(Args)]
struct InspectArgs {
    path: PathBuf,
    /// Also dump layer `N` (1-based) of a model as JSON.
    #[arg(long)]
    layer: Option<usize>,
}

#[derive(Args)]
struct OracleArgs {
    check: oracle::Check,
    /// Cases, samples or pairs, depending on the check.
    #[arg(long, visible_alias = "samples")]
    n: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<dsscn::Error> for Failure {
    fn from(e: dsscn::Error) -> Self {
        match e {
            dsscn::Error::Config(_) | dsscn::Error::InvalidParameter(_) => {
                Failure::Usage(e.to_string().trim_end().into())
            }
            e => Failure::Runtime(e.to_string().trim_end().into()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => generate(&a),
        Command::Run(a) => run(&a),
        Command::Inspect(a) => inspect(&a),
        Command::Oracle(a) => run_oracle(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("dsscn: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("dsscn: {msg}");
            ExitCode::from(1)
        }
    }
}

fn generate(a: &GenerateArgs) -> CmdResult {
    let out = || -> Result<BufWriter<File>, Failure> {
        let f = File::create(&a.out).map_err(|e| Failure::Runtime(format!("{}: {e}", a.out.display())))?;
        Ok(BufWriter::new(f))
    };
    let rows = match a.kind {
        Kind::Sea => {
            let preset = SeaParams::preset();
            let samples = a.samples.unwrap_or(preset.samples);
            let every = a.drift_every.unwrap_or(samples.div_ceil(4).max(1));
            if a.thetas.is_empty() {
                return Err(Failure::Usage("--thetas needs at least one value".into()));
            }
            let params = SeaParams::alternating(samples, every, &a.thetas);
            write_labeled_csv(out()?, SeaGenerator::new(params, a.seed)?)?
        }
        Kind::Hyperplane => {
            let mut params = HyperplaneParams::preset();
            if let Some(n) = a.samples {
                params.drift_start = params.drift_start * n / params.samples;
                params.drift_span = params.drift_span * n / params.samples;
                params.samples = n;
            }
            params.drift_start = a.drift_start.unwrap_or(params.drift_start);
            params.drift_span = a.drift_span.unwrap_or(params.drift_span);
            write_labeled_csv(out()?, HyperplaneGenerator::new(params, a.seed)?)?
        }
    };
    println!("{rows} rows written to {}", a.out.display());
    Ok(())
}

fn resolve_engine(a: &RunArgs) -> Result<EngineConfig, Failure> {
    let base = match &a.config {
        Some(path) => EngineConfig::load(path).map_err(|e| match e {
            dsscn::Error::Io(io) => Failure::Usage(format!("{}: {io}", path.display())),
            e => Failure::from(e),
        })?,
        None => EngineConfig::default(),
    };
    Ok(base.with_overrides(&a.overrides)?)
}

fn base_config(a: &RunArgs) -> Result<RunConfig, Failure> {
    let protocol = match a.protocol {
        ProtocolArg::Holdout => Protocol::Holdout,
        ProtocolArg::Prequential => Protocol::Prequential,
    };
    let (source, chunk, fraction) = match (&a.data, &a.dataset) {
        (Some(path), _) => {
            if !path.is_file() {
                return Err(Failure::Usage(format!("{}: no such file", path.display())));
            }
            let source = StreamSource::Csv {
                path: path.clone(),
                label_column: a.label_column,
            };
            (source, 500, 0.8)
        }
        (None, Some(name)) => dataset_preset(name).ok_or_else(|| Failure::Usage(format!("unknown dataset {name}")))?,
        (None, None) => unreachable!("clap requires a source"),
    };
    let mut cfg = RunConfig::new(source, protocol, a.chunk.unwrap_or(chunk), a.seed);
    cfg.train_fraction = a.train_fraction.unwrap_or(fraction);
    cfg.freeze_after = a.freeze_after;
    cfg.engine = resolve_engine(a)?;
    cfg.validate()?;
    Ok(cfg)
}

/// `trace.csv` -> `trace.seed3.csv` for sweeps; unchanged for single runs.
fn seeded_path(path: &Path, seed: u64, sweep: bool) -> PathBuf {
    if !sweep {
        return path.to_path_buf();
    }
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}.seed{seed}.{}", ext.to_string_lossy()),
        None => format!("{stem}.seed{seed}"),
    };
    path.with_file_name(name)
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))
}

fn write_outputs(a: &RunArgs, report: &RunReport, seed: u64, sweep: bool) -> CmdResult {
    let text = summary_text(report);
    if let Some(p) = &a.trace_out {
        harness::write_trace(create(&seeded_path(p, seed, sweep))?, &report.trace)?;
    }
    if let Some(p) = &a.summary_out {
        std::fs::write(seeded_path(p, seed, sweep), &text)?;
    }
    if let Some(p) = &a.json_out {
        std::fs::write(seeded_path(p, seed, sweep), summary_json(report)?)?;
    }
    if let Some(p) = &a.scopes_out {
        harness::write_scope_events(create(&seeded_path(p, seed, sweep))?, &report.scope_events)?;
    }
    if let Some(p) = &a.timings_out {
        harness::write_timings(create(&seeded_path(p, seed, sweep))?, &report.trace, &report.runtimes)?;
    }
    if a.quiet {
        text.lines()
            .filter(|l| !l.starts_with('#'))
            .for_each(|l| println!("{l}"));
    } else {
        print!("{text}");
    }
    Ok(())
}

fn run(a: &RunArgs) -> CmdResult {
    if a.seeds == 0 || a.jobs == 0 {
        return Err(Failure::Usage("--seeds and --jobs must be at least 1".into()));
    }
    let sweep = a.seeds > 1;
    if sweep && a.model_out.is_some() {
        return Err(Failure::Usage("--model-out needs a single-seed run".into()));
    }
    let base = base_config(a)?;

    if !sweep {
        let mut last = None;
        let report = match base.protocol {
            Protocol::Holdout => harness::run_holdout_with(&base, |n| last = Some(n.clone())),
            Protocol::Prequential => harness::run_prequential_with(&base, |n| last = Some(n.clone())),
        }?;
        if let (Some(path), Some(net)) = (&a.model_out, &last) {
            net.save(path)?;
        }
        return write_outputs(a, &report, base.seed, false);
    }

    let configs: Vec<RunConfig> = (0..a.seeds)
        .map(|k| {
            let mut c = base.clone();
            c.seed = base.seed + k;
            c
        })
        .collect();
    let mut accuracies = Vec::new();
    for (cfg, report) in configs.iter().zip(harness::run_many(&configs, a.jobs)) {
        let report = report?;
        println!("## seed {}", cfg.seed);
        write_outputs(a, &report, cfg.seed, true)?;
        accuracies.push(report.summary.accuracy_mean);
    }
    let n = accuracies.len() as f64;
    let mean = accuracies.iter().sum::<f64>() / n;
    let std = (accuracies.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    println!("## across {} seeds", accuracies.len());
    println!("accuracy = {mean:.4} +- {std:.4}");
    Ok(())
}

fn inspect(a: &InspectArgs) -> CmdResult {
    let text = std::fs::read_to_string(&a.path).map_err(|e| Failure::Runtime(format!("{}: {e}", a.path.display())))?;
    if text.trim_start().starts_with('{') {
        let net = StackedNetwork::from_json(&text)?;
        println!("model: {} features, {} classes", net.n_features(), net.n_classes());
        println!("layers = {}", net.depth());
        println!("total_nodes = {}", net.total_nodes());
        for (i, link) in net.links.iter().enumerate() {
            println!(
                "layer {}: {} nodes, born at stamp {}",
                i + 1,
                link.layer.n_nodes(),
                link.birth_stamp
            );
        }
        let lambda: Vec<String> = net.lambda.0.iter().map(|v| format!("{v:.4}")).collect();
        println!("input_weights = {}", lambda.join(","));
        println!("samples_seen = {}", net.detector.samples_seen());
        if let Some(k) = a.layer {
            if k == 0 || k > net.depth() {
                return Err(Failure::Usage(format!("layer {k} out of range 1..={}", net.depth())));
            }
            println!("{}", net.layer_json(k - 1)?);
        }
    } else {
        if a.layer.is_some() {
            return Err(Failure::Usage("--layer applies to model files".into()));
        }
        let trace = harness::read_trace(text.as_bytes())?;
        if trace.is_empty() {
            return Err(Failure::Runtime(format!("{}: trace has no rows", a.path.display())));
        }
        let report = RunReport {
            header: String::new(),
            summary: summarize(&trace, None),
            trace,
            scope_events: Vec::new(),
            runtimes: Vec::new(),
        };
        let body = summary_text(&report);
        body.lines()
            .filter(|l| !l.starts_with("scope_events"))
            .for_each(|l| println!("{l}"));
    }
    Ok(())
}

fn run_oracle(a: &OracleArgs) -> CmdResult {
    let r = oracle::run_check(a.check, a.n, a.seed);
    println!("check = {:?}", r.check);
    println!("cases = {}", r.cases);
    println!("max_deviation = {:e}", r.max_deviation);
    println!("tolerance = {:e}", r.tolerance);
    if r.passed() {
        println!("PASS");
        Ok(())
    } else {
        println!("FAIL");
        Err(Failure::Runtime(format!(
            "{:?} oracle deviation above tolerance",
            r.check
        )))
    }
}
