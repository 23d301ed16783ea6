use std::collections::HashSet;

use rand::seq::{index, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{ChannelPolicy, Edge, NodeId, Topology, TopologyKind};
use crate::rng::{from_seed, StreamRng};
use crate::{Error, Result};

/// Timelock given to synthetic channels.
const SYNTHETIC_TIMELOCK: u32 = 40;
/// Capacity given to synthetic channels; large enough that amount filtering never bites by default.
const SYNTHETIC_CAPACITY: u64 = 16_777_216;

fn plain(to: usize) -> Edge {
    Edge {
        to: NodeId::from_index(to),
        policy: None,
        channel: None,
    }
}

/// `k` distinct nodes from `0..n` excluding `exclude`, in random order.
fn distinct_others(rng: &mut StreamRng, n: usize, exclude: usize, k: usize) -> Vec<usize> {
    index::sample(rng, n - 1, k)
        .into_iter()
        .map(|i| if i >= exclude { i + 1 } else { i })
        .collect()
}

/// A single directed Hamiltonian cycle over a random permutation of `n` nodes.
pub fn generate_line_graph(n: usize, seed: u64) -> Result<Topology> {
    if n < 3 {
        return Err(Error::invalid(format!("line graph needs n >= 3, got {n}")));
    }
    let mut rng = from_seed(seed);
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);
    let arcs = (0..n).map(|i| (NodeId::from_index(perm[i]), plain(perm[(i + 1) % n])));
    Topology::from_arcs(TopologyKind::Line, n, arcs)
}

/// Every node picks two distinct successors uniformly from all other nodes.
pub fn generate_quasi_4_regular(n: usize, seed: u64) -> Result<Topology> {
    if n < 5 {
        return Err(Error::invalid(format!(
            "quasi-4-regular graph needs n >= 5, got {n}"
        )));
    }
    let mut t = out_regular(n, 2, seed)?;
    t.kind = TopologyKind::Quasi4Regular;
    Ok(t)
}

/// Every node picks `out_k` distinct successors uniformly from all other nodes.
pub fn generate_k_regular(n: usize, out_k: usize, seed: u64) -> Result<Topology> {
    if out_k == 0 || n <= out_k {
        return Err(Error::invalid(format!(
            "k-regular graph needs n > out_k >= 1, got n={n}, out_k={out_k}"
        )));
    }
    out_regular(n, out_k, seed)
}

fn out_regular(n: usize, k: usize, seed: u64) -> Result<Topology> {
    let mut rng = from_seed(seed);
    let mut arcs = Vec::with_capacity(n * k);
    for u in 0..n {
        for v in distinct_others(&mut rng, n, u, k) {
            arcs.push((NodeId::from_index(u), plain(v)));
        }
    }
    Topology::from_arcs(TopologyKind::KRegular { out_k: k as u32 }, n, arcs)
}

/// Privacy subgraph drawn from a base graph: each node keeps `per_node` of its base-graph
/// out-neighbours, chosen uniformly.
pub fn derive_privacy_subgraph(base: &Topology, per_node: usize, seed: u64) -> Result<Topology> {
    let mut rng = from_seed(seed);
    let mut arcs = Vec::with_capacity(base.node_count() * per_node);
    for u in base.nodes() {
        let succ = base.successors(u);
        if succ.len() < per_node {
            return Err(Error::invalid(format!(
                "node {u} has {} base-graph successors, needs {per_node}",
                succ.len()
            )));
        }
        for i in index::sample(&mut rng, succ.len(), per_node) {
            arcs.push((u, plain(succ[i].to.index())));
        }
    }
    let kind = if per_node == 2 {
        TopologyKind::Quasi4Regular
    } else {
        TopologyKind::KRegular {
            out_k: per_node as u32,
        }
    };
    let t = Topology::from_arcs(kind, base.node_count(), arcs)?;
    t.with_roles(base.roles().to_vec())
}

fn check_random_params(n: usize, avg_degree: usize, mean_fee: f64) -> Result<()> {
    if avg_degree < 2 || n <= avg_degree {
        return Err(Error::invalid(format!(
            "random graph needs n > avg_degree >= 2, got n={n}, avg_degree={avg_degree}"
        )));
    }
    if !(mean_fee.is_finite() && mean_fee > 0.0) {
        return Err(Error::invalid(format!("mean_fee must be positive, got {mean_fee}")));
    }
    Ok(())
}

/// Integer base fee uniform on `[ceil(mean/2), floor(3*mean/2)]`, whose expectation is `mean`.
fn draw_fee(rng: &mut StreamRng, mean_fee: f64) -> ChannelPolicy {
    let lo = (mean_fee / 2.0).ceil();
    let hi = (mean_fee * 1.5).floor().max(lo);
    let fee = rng.gen_range(lo as u64..=hi as u64);
    ChannelPolicy {
        proportional_fee_rate: 0.0,
        base_fee: fee as f64,
        timelock: SYNTHETIC_TIMELOCK,
        capacity: SYNTHETIC_CAPACITY,
    }
}

fn channel_arcs(rng: &mut StreamRng, pairs: &[(usize, usize)], mean_fee: f64) -> Vec<(NodeId, Edge)> {
    let mut arcs = Vec::with_capacity(pairs.len() * 2);
    for &(u, v) in pairs {
        for (a, b) in [(u, v), (v, u)] {
            arcs.push((
                NodeId::from_index(a),
                Edge {
                    to: NodeId::from_index(b),
                    policy: Some(draw_fee(rng, mean_fee)),
                    channel: None,
                },
            ));
        }
    }
    arcs
}

/// Uniform random graph with `floor(n * avg_degree / 2)` channels, each materialized as two arcs
/// with independently drawn fees.
pub fn generate_weighted_random_graph(
    n: usize,
    avg_degree: usize,
    mean_fee: f64,
    seed: u64,
) -> Result<Topology> {
    check_random_params(n, avg_degree, mean_fee)?;
    let m = n * avg_degree / 2;
    let mut rng = from_seed(seed);
    let mut seen = HashSet::with_capacity(m);
    let mut pairs = Vec::with_capacity(m);
    while pairs.len() < m {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u == v {
            continue;
        }
        let key = (u.min(v), u.max(v));
        if seen.insert(key) {
            pairs.push(key);
        }
    }
    let arcs = channel_arcs(&mut rng, &pairs, mean_fee);
    Topology::from_arcs(TopologyKind::WeightedRandom, n, arcs)
}

/// Preferential-attachment graph with roughly `avg_degree` mean degree. Node `t` attaches
/// `floor((t+1)d/2) - floor(td/2)` channels to existing nodes chosen proportionally to degree,
/// starting from a clique.
pub fn generate_scale_free(n: usize, avg_degree: usize, mean_fee: f64, seed: u64) -> Result<Topology> {
    check_random_params(n, avg_degree, mean_fee)?;
    let m0 = avg_degree.div_ceil(2) + 1;
    if n < m0 {
        return Err(Error::invalid(format!("scale-free graph needs n >= {m0}")));
    }
    let mut rng = from_seed(seed);
    let mut pairs = Vec::new();
    // one entry per channel endpoint, so uniform draws are degree-proportional
    let mut endpoints = Vec::new();
    for u in 0..m0 {
        for v in (u + 1)..m0 {
            pairs.push((u, v));
            endpoints.extend([u, v]);
        }
    }
    for t in m0..n {
        let m_t = (t + 1) * avg_degree / 2 - t * avg_degree / 2;
        let mut chosen: Vec<usize> = Vec::with_capacity(m_t);
        while chosen.len() < m_t {
            let v = endpoints[rng.gen_range(0..endpoints.len())];
            if !chosen.contains(&v) {
                chosen.push(v);
            }
        }
        for v in chosen {
            pairs.push((v, t));
            endpoints.extend([v, t]);
        }
    }
    let arcs = channel_arcs(&mut rng, &pairs, mean_fee);
    Topology::from_arcs(TopologyKind::ScaleFree, n, arcs)
}

/// A generator and its parameters, so experiments can rebuild a topology per run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case")]
pub enum GeneratorSpec {
    Line { n: usize },
    Quasi4 { n: usize },
    KRegular { n: usize, out_k: usize },
    WeightedRandom { n: usize, avg_degree: usize, mean_fee: f64 },
    ScaleFree { n: usize, avg_degree: usize, mean_fee: f64 },
}

impl GeneratorSpec {
    pub fn generate(&self, seed: u64) -> Result<Topology> {
        match *self {
            GeneratorSpec::Line { n } => generate_line_graph(n, seed),
            GeneratorSpec::Quasi4 { n } => generate_quasi_4_regular(n, seed),
            GeneratorSpec::KRegular { n, out_k } => generate_k_regular(n, out_k, seed),
            GeneratorSpec::WeightedRandom {
                n,
                avg_degree,
                mean_fee,
            } => generate_weighted_random_graph(n, avg_degree, mean_fee, seed),
            GeneratorSpec::ScaleFree {
                n,
                avg_degree,
                mean_fee,
            } => generate_scale_free(n, avg_degree, mean_fee, seed),
        }
    }

    pub fn node_count(&self) -> usize {
        match *self {
            GeneratorSpec::Line { n }
            | GeneratorSpec::Quasi4 { n }
            | GeneratorSpec::KRegular { n, .. }
            | GeneratorSpec::WeightedRandom { n, .. }
            | GeneratorSpec::ScaleFree { n, .. } => n,
        }
    }
}
