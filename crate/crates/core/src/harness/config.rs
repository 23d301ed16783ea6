//! Experiment configuration documents (TOML).
//!
//! Validation collects every problem in the document rather than stopping at the first; each
//! violation names the dotted key it concerns.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use toml::{Table, Value};

use crate::error::ConfigViolation;
use crate::graph::{AdversaryStrategy, GeneratorSpec, NodeId};
use crate::hop::PathEnumerationBounds;
use crate::learning::LearningOptions;
use crate::posterior::Prior;
use crate::routing::DEFAULT_RF;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Dandelion,
    DandelionPp,
    Ln,
    SubgraphLearning,
}

impl Scheme {
    fn parse(s: &str) -> Option<Scheme> {
        Some(match s {
            "dandelion" => Scheme::Dandelion,
            "dandelion_pp" => Scheme::DandelionPp,
            "ln" => Scheme::Ln,
            "subgraph_learning" => Scheme::SubgraphLearning,
            _ => return None,
        })
    }

    fn generators(self) -> &'static [&'static str] {
        match self {
            Scheme::Dandelion => &["line"],
            Scheme::DandelionPp => &["quasi4", "k_regular"],
            Scheme::Ln => &["weighted_random", "scale_free", "snapshot"],
            Scheme::SubgraphLearning => &["k_regular"],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum TopologySpec {
    Generated(GeneratorSpec),
    Snapshot { path: PathBuf },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AdversaryBudget {
    Fraction(f64),
    Count(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AdversaryConfig {
    pub strategy: AdversaryStrategy,
    pub budget: AdversaryBudget,
}

impl AdversaryConfig {
    /// Number of adversaries among `n` nodes: `round(fraction * n)`, at least one.
    pub fn count(&self, n: usize) -> usize {
        match self.budget {
            AdversaryBudget::Count(c) => c,
            AdversaryBudget::Fraction(f) => ((f * n as f64).round() as usize).max(1),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PriorConfig {
    Uniform,
    Table {
        default_weight: f64,
        weights: BTreeMap<NodeId, f64>,
    },
}

impl PriorConfig {
    pub fn to_prior(&self, n: usize) -> Result<Prior> {
        match self {
            PriorConfig::Uniform => Ok(Prior::Uniform),
            PriorConfig::Table {
                default_weight,
                weights,
            } => Prior::from_table(n, weights, *default_weight),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Structured,
}

impl OutputFormat {
    pub fn parse(s: &str) -> Option<OutputFormat> {
        match s {
            "csv" => Some(OutputFormat::Csv),
            "structured" => Some(OutputFormat::Structured),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LnSettings {
    pub amount: f64,
    pub k: usize,
    pub rf: f64,
    pub lcc: bool,
}

impl Default for LnSettings {
    fn default() -> Self {
        LnSettings {
            amount: 1.0,
            k: 1,
            rf: DEFAULT_RF,
            lcc: false,
        }
    }
}

/// A validated experiment description.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub scheme: Scheme,
    pub seed: u64,
    pub runs: usize,
    pub tx_per_node: usize,
    pub p_f: Option<f64>,
    pub topology: TopologySpec,
    pub adversary: AdversaryConfig,
    pub bounds: Option<PathEnumerationBounds>,
    pub ln: Option<LnSettings>,
    pub prior: PriorConfig,
    pub learning: Option<LearningOptions>,
    #[serde(skip)]
    pub output_path: Option<PathBuf>,
    #[serde(skip)]
    pub output_format: OutputFormat,
}

struct Checker {
    violations: Vec<ConfigViolation>,
}

fn join(prefix: &str, key: &str) -> String {
    if prefix.is_empty() {
        key.to_string()
    } else {
        format!("{prefix}.{key}")
    }
}

impl Checker {
    fn bad(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.violations.push(ConfigViolation {
            path: path.into(),
            message: message.into(),
        });
    }

    fn unknown_keys(&mut self, t: &Table, prefix: &str, allowed: &[&str]) {
        for k in t.keys() {
            if !allowed.contains(&k.as_str()) {
                self.bad(join(prefix, k), "unknown key");
            }
        }
    }

    fn float(&mut self, t: &Table, prefix: &str, key: &str) -> Option<f64> {
        match t.get(key)? {
            Value::Float(f) => Some(*f),
            Value::Integer(i) => Some(*i as f64),
            other => {
                self.bad(join(prefix, key), format!("expected a number, found {}", other.type_str()));
                None
            }
        }
    }

    fn int(&mut self, t: &Table, prefix: &str, key: &str) -> Option<i64> {
        match t.get(key)? {
            Value::Integer(i) => Some(*i),
            other => {
                self.bad(join(prefix, key), format!("expected an integer, found {}", other.type_str()));
                None
            }
        }
    }

    /// Integer that must be at least `min`.
    fn count(&mut self, t: &Table, prefix: &str, key: &str, min: i64) -> Option<usize> {
        let v = self.int(t, prefix, key)?;
        if v < min {
            self.bad(join(prefix, key), format!("must be >= {min}, got {v}"));
            return None;
        }
        Some(v as usize)
    }

    fn string<'a>(&mut self, t: &'a Table, prefix: &str, key: &str) -> Option<&'a str> {
        match t.get(key)? {
            Value::String(s) => Some(s),
            other => {
                self.bad(join(prefix, key), format!("expected a string, found {}", other.type_str()));
                None
            }
        }
    }

    fn boolean(&mut self, t: &Table, prefix: &str, key: &str) -> Option<bool> {
        match t.get(key)? {
            Value::Boolean(b) => Some(*b),
            other => {
                self.bad(join(prefix, key), format!("expected a boolean, found {}", other.type_str()));
                None
            }
        }
    }

    fn table<'a>(&mut self, t: &'a Table, key: &str) -> Option<&'a Table> {
        match t.get(key)? {
            Value::Table(s) => Some(s),
            other => {
                self.bad(key, format!("expected a table, found {}", other.type_str()));
                None
            }
        }
    }

    fn forbid(&mut self, t: &Table, prefix: &str, keys: &[&str], why: &str) {
        for k in keys {
            if t.contains_key(*k) {
                self.bad(join(prefix, k), why.to_string());
            }
        }
    }
}

const TOP_KEYS: &[&str] = &[
    "scheme", "seed", "runs", "tx_per_node", "p_f", "topology", "adversary", "bounds", "amount",
    "k", "rf", "lcc", "prior", "learning", "output",
];

/// Parse and validate a configuration document. Relative snapshot and output paths are
/// resolved against `base_dir` when given.
pub fn parse_config(document: &str, base_dir: Option<&Path>) -> Result<ExperimentConfig> {
    let root: Table = document.parse().map_err(|e: toml::de::Error| {
        Error::Config(vec![ConfigViolation {
            path: "<document>".into(),
            message: e.message().trim().to_string(),
        }])
    })?;
    let mut c = Checker {
        violations: Vec::new(),
    };
    c.unknown_keys(&root, "", TOP_KEYS);

    let scheme = match c.string(&root, "", "scheme") {
        Some(s) => Scheme::parse(s).or_else(|| {
            c.bad(
                "scheme",
                format!("unknown scheme `{s}`; expected dandelion, dandelion_pp, ln or subgraph_learning"),
            );
            None
        }),
        None => {
            if !root.contains_key("scheme") {
                c.bad("scheme", "missing required key");
            }
            None
        }
    };

    let seed = match c.int(&root, "", "seed") {
        Some(s) if s < 0 => {
            c.bad("seed", "must be non-negative");
            0
        }
        Some(s) => s as u64,
        None => {
            if !root.contains_key("seed") {
                c.bad("seed", "missing required key");
            }
            0
        }
    };
    let runs = c.count(&root, "", "runs", 1).unwrap_or(1);
    let tx_per_node = c.count(&root, "", "tx_per_node", 1).unwrap_or(1);

    let p_f = c.float(&root, "", "p_f");
    if let Some(p) = p_f {
        if !(0.0..1.0).contains(&p) {
            c.bad("p_f", format!("must be in [0, 1), got {p}"));
        }
    }
    match scheme {
        Some(Scheme::Ln) => {
            if root.contains_key("p_f") {
                c.bad("p_f", "not allowed with scheme `ln` (source routing has no forwarding probability)");
            }
        }
        Some(_) if !root.contains_key("p_f") => c.bad("p_f", "missing required key"),
        _ => {}
    }

    // topology
    let topo_table = c.table(&root, "topology");
    if topo_table.is_none() && !root.contains_key("topology") {
        c.bad("topology", "missing required table");
    }
    let mut node_count: Option<usize> = None;
    let topology = topo_table.and_then(|t| {
        c.unknown_keys(t, "topology", &["generator", "n", "out_k", "avg_degree", "mean_fee", "path"]);
        let generator = c.string(t, "topology", "generator");
        if generator.is_none() && !t.contains_key("generator") {
            c.bad("topology.generator", "missing required key");
        }
        let generator = generator?;
        if let Some(s) = scheme {
            if !s.generators().contains(&generator) {
                c.bad(
                    "topology.generator",
                    format!("`{generator}` cannot be used here; expected one of {:?}", s.generators()),
                );
            }
        }
        let need_count = |c: &mut Checker, key: &str, min: i64| -> Option<usize> {
            if !t.contains_key(key) {
                c.bad(join("topology", key), "missing required key");
                return None;
            }
            c.count(t, "topology", key, min)
        };
        let spec = match generator {
            "snapshot" => {
                c.forbid(t, "topology", &["n", "out_k", "avg_degree", "mean_fee"], "not used with a snapshot");
                let Some(p) = c.string(t, "topology", "path") else {
                    if !t.contains_key("path") {
                        c.bad("topology.path", "missing required key");
                    }
                    return None;
                };
                let path = match base_dir {
                    Some(d) if Path::new(p).is_relative() => d.join(p),
                    _ => PathBuf::from(p),
                };
                if !path.is_file() {
                    c.bad("topology.path", format!("file {} does not exist", path.display()));
                }
                return Some(TopologySpec::Snapshot { path });
            }
            "line" | "quasi4" | "k_regular" => {
                c.forbid(t, "topology", &["avg_degree", "mean_fee", "path"], "not used by this generator");
                let min_n = match generator {
                    "line" => 3,
                    "quasi4" => 5,
                    _ => 2,
                };
                let n = need_count(&mut c, "n", min_n)?;
                match generator {
                    "line" => {
                        c.forbid(t, "topology", &["out_k"], "not used by this generator");
                        GeneratorSpec::Line { n }
                    }
                    "quasi4" => {
                        c.forbid(t, "topology", &["out_k"], "not used by this generator");
                        GeneratorSpec::Quasi4 { n }
                    }
                    _ => {
                        let out_k = need_count(&mut c, "out_k", 1)?;
                        if out_k >= n {
                            c.bad("topology.out_k", format!("must be < n ({n})"));
                        }
                        if scheme == Some(Scheme::SubgraphLearning) && out_k < 2 {
                            c.bad("topology.out_k", "base graph needs at least 2 successors per node");
                        }
                        GeneratorSpec::KRegular { n, out_k }
                    }
                }
            }
            "weighted_random" | "scale_free" => {
                c.forbid(t, "topology", &["out_k", "path"], "not used by this generator");
                let n = need_count(&mut c, "n", 3);
                let avg_degree = need_count(&mut c, "avg_degree", 2);
                let mean_fee = match c.float(t, "topology", "mean_fee") {
                    Some(f) if f > 0.0 && f.is_finite() => Some(f),
                    Some(f) => {
                        c.bad("topology.mean_fee", format!("must be positive, got {f}"));
                        None
                    }
                    None if !t.contains_key("mean_fee") => Some(1000.0),
                    None => None,
                };
                let (n, avg_degree, mean_fee) = (n?, avg_degree?, mean_fee?);
                if avg_degree >= n {
                    c.bad("topology.avg_degree", format!("must be < n ({n})"));
                }
                if generator == "weighted_random" {
                    GeneratorSpec::WeightedRandom { n, avg_degree, mean_fee }
                } else {
                    GeneratorSpec::ScaleFree { n, avg_degree, mean_fee }
                }
            }
            other => {
                c.bad(
                    "topology.generator",
                    format!("unknown generator `{other}`; expected line, quasi4, k_regular, weighted_random, scale_free or snapshot"),
                );
                return None;
            }
        };
        node_count = Some(spec.node_count());
        Some(TopologySpec::Generated(spec))
    });

    // adversary
    let adv_table = c.table(&root, "adversary");
    if adv_table.is_none() && !root.contains_key("adversary") {
        c.bad("adversary", "missing required table");
    }
    let adversary = adv_table.and_then(|t| {
        c.unknown_keys(t, "adversary", &["strategy", "fraction", "count"]);
        let strategy = match c.string(t, "adversary", "strategy") {
            None => Some(AdversaryStrategy::Random),
            Some("random") => Some(AdversaryStrategy::Random),
            Some("top_degree") => Some(AdversaryStrategy::TopDegree),
            Some("top_betweenness") => Some(AdversaryStrategy::TopBetweenness),
            Some(s) => {
                c.bad("adversary.strategy", format!("unknown strategy `{s}`; expected random, top_degree or top_betweenness"));
                None
            }
        };
        if scheme == Some(Scheme::SubgraphLearning) && strategy.is_some_and(|s| s != AdversaryStrategy::Random) {
            c.bad("adversary.strategy", "subgraph learning places adversaries at random");
        }
        let budget = match (t.contains_key("fraction"), t.contains_key("count")) {
            (true, true) => {
                c.bad("adversary", "give either `fraction` or `count`, not both");
                None
            }
            (false, false) => {
                c.bad("adversary.fraction", "missing; give `fraction` or `count`");
                None
            }
            (true, false) => c.float(t, "adversary", "fraction").and_then(|f| {
                if f > 0.0 && f < 1.0 {
                    Some(AdversaryBudget::Fraction(f))
                } else {
                    c.bad("adversary.fraction", format!("must be in (0, 1), got {f}"));
                    None
                }
            }),
            (false, true) => {
                if scheme == Some(Scheme::SubgraphLearning) {
                    c.bad("adversary.count", "subgraph learning takes `fraction`");
                }
                c.count(t, "adversary", "count", 1).and_then(|k| {
                    if node_count.is_some_and(|n| k >= n) {
                        c.bad("adversary.count", format!("must be < n ({})", node_count.unwrap_or(0)));
                        None
                    } else {
                        Some(AdversaryBudget::Count(k))
                    }
                })
            }
        };
        Some(AdversaryConfig {
            strategy: strategy?,
            budget: budget?,
        })
    });

    // bounds
    let bounds = c.table(&root, "bounds").map(|t| {
        if scheme != Some(Scheme::DandelionPp) {
            c.bad("bounds", "only used with scheme `dandelion_pp`");
        }
        c.unknown_keys(t, "bounds", &["max_hops", "min_contribution"]);
        let d = PathEnumerationBounds::default();
        let max_hops = c.count(t, "bounds", "max_hops", 1);
        let min_contribution = match c.float(t, "bounds", "min_contribution") {
            Some(m) if (0.0..1.0).contains(&m) => Some(m),
            Some(m) => {
                c.bad("bounds.min_contribution", format!("must be in [0, 1), got {m}"));
                None
            }
            None => None,
        };
        PathEnumerationBounds {
            max_hops: max_hops.unwrap_or(d.max_hops),
            min_contribution: min_contribution.unwrap_or(d.min_contribution),
        }
    });

    // ln
    const LN_KEYS: &[&str] = &["amount", "k", "rf", "lcc"];
    let ln = if scheme == Some(Scheme::Ln) {
        let d = LnSettings::default();
        let amount = match c.float(&root, "", "amount") {
            Some(a) if a >= 0.0 && a.is_finite() => a,
            Some(a) => {
                c.bad("amount", format!("must be >= 0, got {a}"));
                d.amount
            }
            None => d.amount,
        };
        let rf = match c.float(&root, "", "rf") {
            Some(r) if r >= 0.0 && r.is_finite() => r,
            Some(r) => {
                c.bad("rf", format!("must be >= 0, got {r}"));
                d.rf
            }
            None => d.rf,
        };
        Some(LnSettings {
            amount,
            k: c.count(&root, "", "k", 1).unwrap_or(d.k),
            rf,
            lcc: c.boolean(&root, "", "lcc").unwrap_or(d.lcc),
        })
    } else {
        c.forbid(&root, "", LN_KEYS, "only used with scheme `ln`");
        None
    };

    // prior
    let prior = match c.table(&root, "prior") {
        None => PriorConfig::Uniform,
        Some(t) => {
            if scheme == Some(Scheme::SubgraphLearning) {
                c.bad("prior", "not used with scheme `subgraph_learning`");
            }
            c.unknown_keys(t, "prior", &["kind", "default_weight", "weights"]);
            match c.string(t, "prior", "kind").unwrap_or("uniform") {
                "uniform" => {
                    c.forbid(t, "prior", &["default_weight", "weights"], "only used with kind `table`");
                    PriorConfig::Uniform
                }
                "table" => {
                    let default_weight = match c.float(t, "prior", "default_weight") {
                        Some(w) if w >= 0.0 && w.is_finite() => w,
                        Some(w) => {
                            c.bad("prior.default_weight", format!("must be >= 0, got {w}"));
                            1.0
                        }
                        None => 1.0,
                    };
                    let mut weights = BTreeMap::new();
                    match t.get("weights") {
                        Some(Value::Table(w)) => {
                            for (k, v) in w {
                                let path = format!("prior.weights.{k}");
                                let id = k.parse::<u32>().ok().filter(|&i| {
                                    node_count.is_none_or(|n| (i as usize) < n)
                                });
                                let weight = match v {
                                    Value::Float(f) => Some(*f),
                                    Value::Integer(i) => Some(*i as f64),
                                    _ => None,
                                };
                                match (id, weight) {
                                    (None, _) => c.bad(path, "key must be a node id within the topology"),
                                    (_, None) => c.bad(path, "weight must be a number"),
                                    (Some(_), Some(w)) if !(w >= 0.0 && w.is_finite()) => {
                                        c.bad(path, "weight must be finite and >= 0")
                                    }
                                    (Some(i), Some(w)) => {
                                        weights.insert(NodeId(i), w);
                                    }
                                }
                            }
                        }
                        Some(other) => c.bad("prior.weights", format!("expected a table, found {}", other.type_str())),
                        None => c.bad("prior.weights", "missing required key for kind `table`"),
                    }
                    PriorConfig::Table {
                        default_weight,
                        weights,
                    }
                }
                other => {
                    c.bad("prior.kind", format!("unknown prior `{other}`; expected uniform or table"));
                    PriorConfig::Uniform
                }
            }
        }
    };

    // learning
    let learning = match (scheme, c.table(&root, "learning")) {
        (Some(Scheme::SubgraphLearning), t) => {
            let mut o = LearningOptions::default();
            if let Some(t) = t {
                c.unknown_keys(t, "learning", &["second_hop", "edge_elimination"]);
                o.second_hop = c.boolean(t, "learning", "second_hop").unwrap_or(false);
                o.edge_elimination = c.boolean(t, "learning", "edge_elimination").unwrap_or(false);
            }
            Some(o)
        }
        (_, Some(_)) => {
            c.bad("learning", "only used with scheme `subgraph_learning`");
            None
        }
        _ => None,
    };

    // output
    let (output_path, output_format) = match c.table(&root, "output") {
        None => (None, OutputFormat::Csv),
        Some(t) => {
            c.unknown_keys(t, "output", &["path", "format"]);
            let path = c.string(t, "output", "path").map(|p| match base_dir {
                Some(d) if Path::new(p).is_relative() => d.join(p),
                _ => PathBuf::from(p),
            });
            let format = match c.string(t, "output", "format") {
                None => OutputFormat::Csv,
                Some(s) => OutputFormat::parse(s).unwrap_or_else(|| {
                    c.bad("output.format", format!("unknown format `{s}`; expected csv or structured"));
                    OutputFormat::Csv
                }),
            };
            (path, format)
        }
    };

    if !c.violations.is_empty() {
        return Err(Error::Config(c.violations));
    }
    Ok(ExperimentConfig {
        scheme: scheme.expect("validated"),
        seed,
        runs,
        tx_per_node,
        p_f,
        topology: topology.expect("validated"),
        adversary: adversary.expect("validated"),
        bounds,
        ln,
        prior,
        learning,
        output_path,
        output_format,
    })
}
