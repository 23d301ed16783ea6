//! Configuration-driven experiment runs.

mod config;
mod report;

use std::fs;
use std::path::Path;
use std::sync::Arc;

pub use config::{
    parse_config, AdversaryBudget, AdversaryConfig, ExperimentConfig, LnSettings, OutputFormat,
    PriorConfig, Scheme, TopologySpec,
};
pub use report::{
    meta_path, parse_records_csv, render, write_report, ExperimentReport, LearnedRun,
    LearningReport, RecordRow, Report, ReportMeta, CSV_HEADER,
};

use crate::graph::{load_ln_snapshot, AdversarySpec, GeneratorSpec};
use crate::hop::{run_hop_by_hop_experiment, HopExperiment, StemScheme};
use crate::learning::LearningExperiment;
use crate::metrics::summarize;
use crate::rng::derive_seed;
use crate::routing::{run_ln_experiment, LnExperiment, TopologySource};
use crate::{Error, Result};

/// Read and validate a configuration file. Relative snapshot paths resolve against its directory.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let doc = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config(&doc, path.parent())
}

fn generated(cfg: &ExperimentConfig) -> Result<&GeneratorSpec> {
    match &cfg.topology {
        TopologySpec::Generated(g) => Ok(g),
        TopologySpec::Snapshot { .. } => Err(Error::invalid("this scheme needs a generated topology")),
    }
}

fn p_f(cfg: &ExperimentConfig) -> Result<f64> {
    cfg.p_f.ok_or_else(|| Error::invalid("p_f is required for this scheme"))
}

/// Run on the current rayon pool.
pub fn run(cfg: &ExperimentConfig) -> Result<Report> {
    match cfg.scheme {
        Scheme::Dandelion | Scheme::DandelionPp => {
            let g = generated(cfg)?;
            let n = g.node_count();
            let exp = HopExperiment {
                scheme: if cfg.scheme == Scheme::Dandelion {
                    StemScheme::Dandelion
                } else {
                    StemScheme::DandelionPp
                },
                topology: g.clone(),
                p_f: p_f(cfg)?,
                adversary: AdversarySpec { strategy: cfg.adversary.strategy, count: cfg.adversary.count(n) },
                runs: cfg.runs,
                tx_per_node: cfg.tx_per_node,
                bounds: cfg.bounds,
                prior: cfg.prior.to_prior(n)?,
                seed: cfg.seed,
            };
            let out = run_hop_by_hop_experiment(&exp)?;
            Ok(Report::Experiment(ExperimentReport::new(cfg.clone(), &out)?))
        }
        Scheme::Ln => {
            let (source, n) = match &cfg.topology {
                TopologySpec::Generated(g) => (TopologySource::Generated(g.clone()), g.node_count()),
                TopologySpec::Snapshot { path } => {
                    let doc = fs::read_to_string(path).map_err(|source| Error::Io {
                        path: path.display().to_string(),
                        source,
                    })?;
                    let t = load_ln_snapshot(&doc)?;
                    let n = t.node_count();
                    (TopologySource::Fixed(Arc::new(t)), n)
                }
            };
            let ln = cfg.ln.clone().unwrap_or_default();
            let exp = LnExperiment {
                topology: source,
                adversary: AdversarySpec { strategy: cfg.adversary.strategy, count: cfg.adversary.count(n) },
                amount: ln.amount,
                k: ln.k,
                rf: ln.rf,
                lcc: ln.lcc,
                runs: cfg.runs,
                prior: cfg.prior.to_prior(n)?,
                seed: cfg.seed,
            };
            let out = run_ln_experiment(&exp)?;
            Ok(Report::Experiment(ExperimentReport::new(cfg.clone(), &out)?))
        }
        Scheme::SubgraphLearning => Ok(Report::Learning(run_learning(cfg)?)),
    }
}

fn run_learning(cfg: &ExperimentConfig) -> Result<LearningReport> {
    use rayon::prelude::*;
    let (n, base_out) = match generated(cfg)? {
        GeneratorSpec::KRegular { n, out_k } => (*n, *out_k),
        _ => return Err(Error::invalid("subgraph learning needs a k_regular base graph")),
    };
    let fraction = match cfg.adversary.budget {
        AdversaryBudget::Fraction(f) => f,
        AdversaryBudget::Count(c) => c as f64 / n as f64,
    };
    let p_f = p_f(cfg)?;
    let options = cfg.learning.unwrap_or_default();
    let runs: Vec<LearnedRun> = (0..cfg.runs)
        .into_par_iter()
        .map(|run| {
            let exp = LearningExperiment {
                n,
                base_out,
                adversary_fraction: fraction,
                tx_per_node: cfg.tx_per_node,
                p_f,
                seed: derive_seed(cfg.seed, "run", run as u64),
                options,
            };
            exp.run().map(|learned| LearnedRun { run, learned }).map_err(|e| e.in_run(run))
        })
        .collect::<Result<_>>()?;
    let acc: Vec<f64> = runs.iter().map(|r| r.learned.accuracy).collect();
    Ok(LearningReport {
        version: env!("CARGO_PKG_VERSION"),
        config: cfg.clone(),
        accuracy: summarize(&acc)?,
        runs,
    })
}

/// Run on a dedicated pool of `workers` threads. The report does not depend on `workers`.
pub fn run_with_workers(cfg: &ExperimentConfig, workers: usize) -> Result<Report> {
    if workers == 0 {
        return Err(Error::invalid("workers must be >= 1"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    pool.install(|| run(cfg))
}

#[cfg(test)]
mod tests {
    use super::*;

    const LN: &str = "scheme = \"ln\"\nseed = 3\nruns = 2\nlcc = true\n[topology]\ngenerator = \"weighted_random\"\nn = 40\navg_degree = 4\nmean_fee = 1000.0\n[adversary]\nstrategy = \"top_degree\"\nfraction = 0.05\n";

    #[test]
    fn worker_count_does_not_change_bytes() {
        let cfg = parse_config(LN, None).unwrap();
        let a = render(&run_with_workers(&cfg, 1).unwrap(), OutputFormat::Csv);
        let b = render(&run_with_workers(&cfg, 4).unwrap(), OutputFormat::Csv);
        assert_eq!(a, b);
    }

    #[test]
    fn learning_report() {
        let cfg = parse_config(
            "scheme = \"subgraph_learning\"\nseed = 2\nruns = 2\ntx_per_node = 20\np_f = 0.9\n[topology]\ngenerator = \"k_regular\"\nn = 100\nout_k = 8\n[adversary]\nfraction = 0.1\n",
            None,
        )
        .unwrap();
        let Report::Learning(r) = run(&cfg).unwrap() else { panic!() };
        assert_eq!(r.runs.len(), 2);
        assert!(r.accuracy.min > 0.5);
    }
}
