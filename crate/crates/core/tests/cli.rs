use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use anonsim::harness::{load_config, parse_records_csv, CSV_HEADER};
use anonsim::metrics::summarize;

fn anonsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_anonsim")).args(args).output().unwrap()
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

const SMALL_DANDELION: &str = "scheme = \"dandelion\"\nseed = 4\nruns = 5\np_f = 0.9\n[topology]\ngenerator = \"line\"\nn = 200\n[adversary]\nfraction = 0.1\n";

#[test]
fn shipped_configs_validate() {
    let mut n = 0;
    for entry in fs::read_dir(configs()).unwrap() {
        let p = entry.unwrap().path();
        if p.extension().is_some_and(|e| e == "toml") {
            load_config(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
            n += 1;
        }
    }
    assert!(n >= 4);
}

#[test]
fn run_writes_csv_and_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "d.toml", SMALL_DANDELION);
    let out = dir.path().join("d.csv");
    let o = anonsim(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--workers", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with(CSV_HEADER));
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("d.csv.meta.json")).unwrap()).unwrap();
    let rows = parse_records_csv(&csv).unwrap();
    assert_eq!(rows.len() as u64, meta["intercepted"].as_u64().unwrap());
    let h: Vec<f64> = rows.iter().map(|r| r.entropy_bits).collect();
    let s = summarize(&h).unwrap();
    assert_eq!(meta["entropy"]["median"].as_f64().unwrap(), s.median);
    assert_eq!(meta["entropy"]["mean"].as_f64().unwrap(), s.mean);
    assert!(String::from_utf8_lossy(&o.stderr).contains("wall-clock"));
    assert!(!fs::read_to_string(dir.path().join("d.csv.meta.json")).unwrap().contains("wall"));

    let o = anonsim(&["summarize", out.to_str().unwrap()]);
    assert!(o.status.success());
    let summary: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(summary["entropy"], meta["entropy"]);
}

#[test]
fn worker_count_and_seed_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "d.toml", SMALL_DANDELION);
    let cfg = cfg.to_str().unwrap();
    let stdout = |extra: &[&str]| {
        let mut a = vec!["run", "--config", cfg, "--format", "structured"];
        a.extend_from_slice(extra);
        let o = anonsim(&a);
        assert!(o.status.success());
        o.stdout
    };
    let one = stdout(&["--workers", "1"]);
    assert_eq!(one, stdout(&["--workers", "3"]));
    assert_eq!(one, stdout(&["--seed", "4"]));
    assert_ne!(one, stdout(&["--seed", "5"]));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.toml", "scheme = \"ln\"\nseed = 1\np_f = 0.5\n");
    let o = anonsim(&["run", "--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("p_f") && err.contains("topology"), "{err}");

    let o = anonsim(&["run", "--config", dir.path().join("missing.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));

    let cfg = write(dir.path(), "d.toml", SMALL_DANDELION);
    let o = anonsim(&["run", "--config", cfg.to_str().unwrap(), "--out", "/nonexistent/dir/out.csv"]);
    assert_eq!(o.status.code(), Some(3));

    let o = anonsim(&["learn-subgraph", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn gen_topology_round_trips_through_ln_run() {
    let dir = tempfile::tempdir().unwrap();
    let gen = write(
        dir.path(),
        "g.toml",
        "scheme = \"ln\"\nseed = 3\n[topology]\ngenerator = \"weighted_random\"\nn = 40\navg_degree = 4\nmean_fee = 1000.0\n[adversary]\nstrategy = \"top_degree\"\ncount = 2\n",
    );
    let snap = dir.path().join("snap.json");
    let o = anonsim(&["gen-topology", "--config", gen.to_str().unwrap(), "--out", snap.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let run = write(
        dir.path(),
        "r.toml",
        "scheme = \"ln\"\nseed = 3\nlcc = true\n[topology]\ngenerator = \"snapshot\"\npath = \"snap.json\"\n[adversary]\nstrategy = \"top_betweenness\"\ncount = 2\n[output]\npath = \"r.json\"\nformat = \"structured\"\n",
    );
    let o = anonsim(&["run", "--config", run.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(report["records"].as_array().unwrap().len() as u64, report["intercepted"].as_u64().unwrap());
}

#[test]
fn learn_subgraph_reports_accuracy() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "l.toml",
        "scheme = \"subgraph_learning\"\nseed = 1\ntx_per_node = 30\np_f = 0.9\n[topology]\ngenerator = \"k_regular\"\nn = 150\nout_k = 8\n[adversary]\nfraction = 0.1\n[learning]\nsecond_hop = true\n",
    );
    let o = anonsim(&["learn-subgraph", "--config", cfg.to_str().unwrap(), "--format", "structured"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let acc = r["runs"][0]["accuracy"].as_f64().unwrap();
    assert!(acc > 0.5 && acc <= 1.0);
    assert!(!r["runs"][0]["edges"].as_array().unwrap().is_empty());
}
