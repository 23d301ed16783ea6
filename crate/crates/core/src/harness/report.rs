//! Experiment reports and their CSV / JSON renderings.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, OutputFormat};
use crate::learning::LearnedSubgraph;
use crate::metrics::{summarize, Summary, QUANTILE_METHOD};
use crate::outcome::{Outcome, TxRecord};
use crate::{Error, Result};

pub const CSV_HEADER: &str = "run,observation,entropy_bits,min_entropy_bits,support";

/// One CSV row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecordRow {
    pub run: usize,
    pub observation: String,
    pub entropy_bits: f64,
    pub min_entropy_bits: f64,
    pub support: usize,
}

impl From<&TxRecord> for RecordRow {
    fn from(r: &TxRecord) -> Self {
        RecordRow {
            run: r.run,
            observation: r.observation.to_string(),
            entropy_bits: r.entropy_bits,
            min_entropy_bits: r.min_entropy_bits,
            support: r.support,
        }
    }
}

impl RecordRow {
    fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.run, self.observation, self.entropy_bits, self.min_entropy_bits, self.support
        )
    }
}

/// Everything in a report except the per-transaction records.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportMeta {
    pub version: &'static str,
    pub config: ExperimentConfig,
    pub transactions: u64,
    pub intercepted: u64,
    pub intercept_fraction: f64,
    /// Entropy of intercepted transactions; absent when nothing was intercepted.
    pub entropy: Option<Summary>,
    pub min_entropy: Option<Summary>,
    pub quantile_method: &'static str,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentReport {
    #[serde(flatten)]
    pub meta: ReportMeta,
    pub records: Vec<RecordRow>,
}

impl ExperimentReport {
    pub fn new(config: ExperimentConfig, outcome: &Outcome) -> Result<ExperimentReport> {
        let records: Vec<RecordRow> = outcome.records.iter().map(RecordRow::from).collect();
        let entropies: Vec<f64> = records.iter().map(|r| r.entropy_bits).collect();
        let mins: Vec<f64> = records.iter().map(|r| r.min_entropy_bits).collect();
        let summary = |v: &[f64]| (!v.is_empty()).then(|| summarize(v)).transpose();
        Ok(ExperimentReport {
            meta: ReportMeta {
                version: env!("CARGO_PKG_VERSION"),
                config,
                transactions: outcome.transactions,
                intercepted: outcome.intercepted,
                intercept_fraction: outcome.intercept_fraction()?,
                entropy: summary(&entropies)?,
                min_entropy: summary(&mins)?,
                quantile_method: QUANTILE_METHOD,
            },
            records,
        })
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(64 * (self.records.len() + 1));
        s.push_str(CSV_HEADER);
        s.push('\n');
        for r in &self.records {
            s.push_str(&r.csv_line());
            s.push('\n');
        }
        s
    }

    pub fn meta_json(&self) -> String {
        pretty(&self.meta)
    }

    pub fn to_json(&self) -> String {
        pretty(self)
    }
}

/// One subgraph-learning run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LearnedRun {
    pub run: usize,
    #[serde(flatten)]
    pub learned: LearnedSubgraph,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LearningReport {
    pub version: &'static str,
    pub config: ExperimentConfig,
    pub accuracy: Summary,
    pub runs: Vec<LearnedRun>,
}

impl LearningReport {
    pub fn to_json(&self) -> String {
        pretty(self)
    }

    /// `run,accuracy,honest_accuracy,ties` per run.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("run,accuracy,honest_accuracy,ties\n");
        for r in &self.runs {
            let ties = r.learned.targets.iter().filter(|t| t.tie).count();
            s.push_str(&format!(
                "{},{},{},{}\n",
                r.run, r.learned.accuracy, r.learned.honest_accuracy, ties
            ));
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Report {
    Experiment(ExperimentReport),
    Learning(LearningReport),
}

fn pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

/// Where the sibling metadata of a CSV report goes: `<out>.meta.json`.
pub fn meta_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

/// Rendered documents as `(path suffix, bytes)`: the main document first, then any sibling.
pub fn render(report: &Report, format: OutputFormat) -> (String, Option<String>) {
    match (report, format) {
        (Report::Experiment(r), OutputFormat::Csv) => (r.to_csv(), Some(r.meta_json())),
        (Report::Experiment(r), OutputFormat::Structured) => (r.to_json(), None),
        (Report::Learning(r), OutputFormat::Csv) => (r.to_csv(), None),
        (Report::Learning(r), OutputFormat::Structured) => (r.to_json(), None),
    }
}

fn write(path: &Path, body: &str) -> Result<()> {
    fs::write(path, body).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Write `report` to `out` (plus `<out>.meta.json` for CSV experiment reports).
pub fn write_report(report: &Report, format: OutputFormat, out: &Path) -> Result<()> {
    let (main, sibling) = render(report, format);
    write(out, &main)?;
    if let Some(meta) = sibling {
        write(&meta_path(out), &meta)?;
    }
    Ok(())
}

/// Parse a records CSV produced by [`ExperimentReport::to_csv`].
pub fn parse_records_csv(doc: &str) -> Result<Vec<RecordRow>> {
    let mut lines = doc.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == CSV_HEADER => {}
        _ => {
            return Err(Error::Parse {
                record: "line 1".into(),
                message: format!("expected header `{CSV_HEADER}`"),
            })
        }
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let record = format!("line {}", i + 1);
        let err = |message: String| Error::Parse {
            record: record.clone(),
            message,
        };
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 5 {
            return Err(err(format!("expected 5 fields, found {}", f.len())));
        }
        let num = |s: &str, what: &str| s.trim().parse::<f64>().map_err(|e| err(format!("{what}: {e}")));
        let int = |s: &str, what: &str| s.trim().parse::<usize>().map_err(|e| err(format!("{what}: {e}")));
        rows.push(RecordRow {
            run: int(f[0], "run")?,
            observation: f[1].to_string(),
            entropy_bits: num(f[2], "entropy_bits")?,
            min_entropy_bits: num(f[3], "min_entropy_bits")?,
            support: int(f[4], "support")?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::parse_config;
    use crate::outcome::TxRecord;
    use crate::posterior::ObservationKey;
    use crate::graph::NodeId;

    fn config() -> ExperimentConfig {
        parse_config(
            "scheme = \"dandelion\"\nseed = 1\np_f = 0.9\n[topology]\ngenerator = \"line\"\nn = 10\n[adversary]\ncount = 1\n",
            None,
        )
        .unwrap()
    }

    fn record(run: usize, h: f64) -> TxRecord {
        TxRecord {
            run,
            observation: ObservationKey::LnAdversary { adversary: NodeId(3) },
            entropy_bits: h,
            min_entropy_bits: h / 2.0,
            support: 4,
        }
    }

    #[test]
    fn empty_report_is_header_only() {
        let out = Outcome { records: vec![], transactions: 9, intercepted: 0 };
        let r = ExperimentReport::new(config(), &out).unwrap();
        assert_eq!(r.to_csv(), format!("{CSV_HEADER}\n"));
        assert!(r.meta_json().contains("\"intercept_fraction\": 0.0"));
        assert!(r.meta.entropy.is_none());
    }

    #[test]
    fn three_records_four_lines_and_stable_bytes() {
        let out = Outcome {
            records: vec![record(0, 1.0), record(0, 0.1 + 0.2), record(1, 2.5)],
            transactions: 9,
            intercepted: 3,
        };
        let r = ExperimentReport::new(config(), &out).unwrap();
        let csv = r.to_csv();
        assert_eq!(csv.lines().count(), 4);
        assert_eq!(csv, ExperimentReport::new(config(), &out).unwrap().to_csv());
        let rows = parse_records_csv(&csv).unwrap();
        assert_eq!(rows, r.records);
        let again: Vec<f64> = rows.iter().map(|x| x.entropy_bits).collect();
        assert_eq!(summarize(&again).unwrap(), r.meta.entropy.unwrap());
    }

    #[test]
    fn meta_path_appends_suffix() {
        assert_eq!(meta_path(Path::new("/tmp/out.csv")), PathBuf::from("/tmp/out.csv.meta.json"));
    }
}
