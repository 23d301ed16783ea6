use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use anonsim::graph::{emit_snapshot, load_ln_snapshot, AdversarySpec};
use anonsim::harness::{
    load_config, parse_records_csv, render, run_with_workers, write_report, ExperimentConfig,
    OutputFormat, Scheme, TopologySpec,
};
use anonsim::metrics::{summarize, Summary, QUANTILE_METHOD};
use anonsim::rng::derive_seed;
use anonsim::routing::RoutingParams;
use anonsim::{ConfigViolation, Error, Result};

#[derive(Parser)]
#[command(name = "anonsim", version, about = "Deanonymization simulator for transaction relay and payment routing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the configured topology (adversaries placed) and write it as a snapshot document.
    GenTopology(ConfigArgs),
    /// Run a Dandelion, Dandelion++ or LN experiment.
    Run(ConfigArgs),
    /// Run a privacy-subgraph learning experiment.
    LearnSubgraph(ConfigArgs),
    /// Recompute aggregates from a records CSV.
    Summarize {
        csv: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ConfigArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; defaults to the available cores.
    #[arg(long)]
    workers: Option<usize>,
    /// Overrides the configured output path. Without any, the report goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Structured,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Structured => OutputFormat::Structured,
        }
    }
}

fn config_error(path: &str, message: impl Into<String>) -> Error {
    Error::Config(vec![ConfigViolation {
        path: path.into(),
        message: message.into(),
    }])
}

fn load(args: &ConfigArgs) -> Result<ExperimentConfig> {
    let mut cfg = load_config(&args.config).map_err(|e| match e {
        Error::Io { .. } => config_error("--config", e.to_string()),
        e => e,
    })?;
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(o) = &args.out {
        cfg.output_path = Some(o.clone());
    }
    if let Some(f) = args.format {
        cfg.output_format = f.into();
    }
    Ok(cfg)
}

fn workers(args: &ConfigArgs) -> Result<usize> {
    match args.workers {
        Some(0) => Err(config_error("--workers", "must be >= 1")),
        Some(w) => Ok(w),
        None => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn write_out(out: Option<&Path>, body: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, body).map_err(|source| Error::Io {
            path: p.display().to_string(),
            source,
        }),
        None => std::io::stdout()
            .write_all(body.as_bytes())
            .map_err(|source| Error::Io { path: "<stdout>".into(), source }),
    }
}

fn run_experiment(args: &ConfigArgs, learning: bool) -> Result<()> {
    let cfg = load(args)?;
    if learning != (cfg.scheme == Scheme::SubgraphLearning) {
        let want = if learning { "`subgraph_learning`" } else { "not `subgraph_learning`" };
        return Err(config_error("scheme", format!("this subcommand needs a scheme that is {want}")));
    }
    let report = run_with_workers(&cfg, workers(args)?)?;
    match &cfg.output_path {
        Some(p) => write_report(&report, cfg.output_format, p),
        None => write_out(None, &render(&report, cfg.output_format).0),
    }
}

fn gen_topology(args: &ConfigArgs) -> Result<()> {
    let cfg = load(args)?;
    let t = match &cfg.topology {
        TopologySpec::Generated(g) => g.generate(derive_seed(cfg.seed, "topology", 0))?,
        TopologySpec::Snapshot { path } => {
            let doc = fs::read_to_string(path).map_err(|source| Error::Io {
                path: path.display().to_string(),
                source,
            })?;
            load_ln_snapshot(&doc)?
        }
    };
    let spec = AdversarySpec {
        strategy: cfg.adversary.strategy,
        count: cfg.adversary.count(t.node_count()),
    };
    let t = spec.apply(&t, derive_seed(cfg.seed, "adversaries", 0), &RoutingParams::default())?;
    write_out(cfg.output_path.as_deref(), &emit_snapshot(&t, true))
}

#[derive(Serialize)]
struct CsvSummary {
    records: usize,
    entropy: Option<Summary>,
    min_entropy: Option<Summary>,
    quantile_method: &'static str,
}

fn summarize_csv(csv: &Path, out: Option<&Path>) -> Result<()> {
    let doc = fs::read_to_string(csv).map_err(|source| Error::Io {
        path: csv.display().to_string(),
        source,
    })?;
    let rows = parse_records_csv(&doc)?;
    let h: Vec<f64> = rows.iter().map(|r| r.entropy_bits).collect();
    let m: Vec<f64> = rows.iter().map(|r| r.min_entropy_bits).collect();
    let s = CsvSummary {
        records: rows.len(),
        entropy: if h.is_empty() { None } else { Some(summarize(&h)?) },
        min_entropy: if m.is_empty() { None } else { Some(summarize(&m)?) },
        quantile_method: QUANTILE_METHOD,
    };
    let mut body = serde_json::to_string_pretty(&s).expect("summary serializes");
    body.push('\n');
    write_out(out, &body)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    let result = match &cli.command {
        Command::GenTopology(a) => gen_topology(a),
        Command::Run(a) => run_experiment(a, false),
        Command::LearnSubgraph(a) => run_experiment(a, true),
        Command::Summarize { csv, out } => summarize_csv(csv, out.as_deref()),
    };
    eprintln!("wall-clock: {:.3} s", started.elapsed().as_secs_f64());
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config_error() { 2 } else { 3 })
        }
    }
}
