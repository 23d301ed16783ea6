//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use anonsim::graph::{generate_line_graph, NodeId, Topology, TopologyKind};
use anonsim::hop::StemObservation;
use anonsim::routing::RoutingParams;
use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn ids(v: &[u32]) -> Vec<NodeId> {
    v.iter().map(|&x| NodeId(x)).collect()
}

/// Random digraph on `n` nodes where every node has between 1 and `max_out` successors.
pub fn random_stem_graph(rng: &mut ChaCha8Rng, n: usize, max_out: usize) -> Topology {
    let mut edges = Vec::new();
    for u in 0..n {
        let k = rng.gen_range(1..=max_out.min(n - 1));
        for j in sample(rng, n - 1, k) {
            let v = if j >= u { j + 1 } else { j };
            edges.push((NodeId(u as u32), NodeId(v as u32)));
        }
    }
    Topology::from_edge_list(TopologyKind::Quasi4Regular, n, &edges).unwrap()
}

pub fn random_adversaries(rng: &mut ChaCha8Rng, t: &Topology, count: usize) -> Topology {
    let adv: Vec<NodeId> = sample(rng, t.node_count(), count)
        .into_iter()
        .map(|i| NodeId(i as u32))
        .collect();
    t.with_adversaries(&adv).unwrap()
}

pub fn random_line(rng: &mut ChaCha8Rng, n: usize, adversaries: usize) -> Topology {
    let t = generate_line_graph(n, rng.gen()).unwrap();
    random_adversaries(rng, &t, adversaries)
}

/// Expands every coin flip and successor choice of one stem starting at `origin`. Returns
/// the probability of each interception and the total probability of diffusion.
pub fn stem_decision_tree(t: &Topology, origin: NodeId, p_f: f64) -> (BTreeMap<StemObservation, f64>, f64) {
    let mut hits = BTreeMap::new();
    let mut diffused = 0.0;
    let mut visited = vec![origin];
    expand(t, origin, 1.0, p_f, true, &mut visited, &mut hits, &mut diffused);
    (hits, diffused)
}

#[allow(clippy::too_many_arguments)]
fn expand(
    t: &Topology,
    holder: NodeId,
    prob: f64,
    p_f: f64,
    is_origin: bool,
    visited: &mut Vec<NodeId>,
    hits: &mut BTreeMap<StemObservation, f64>,
    diffused: &mut f64,
) {
    // an intermediary flips the coin first; the originator always relays
    let relay = if is_origin { prob } else { prob * p_f };
    if !is_origin {
        *diffused += prob * (1.0 - p_f);
    }
    let succ: Vec<NodeId> = t.successor_ids(holder).collect();
    if succ.is_empty() {
        *diffused += relay;
        return;
    }
    let each = relay / succ.len() as f64;
    for w in succ {
        if t.is_adversarial(w) {
            *hits
                .entry(StemObservation { adversary: w, predecessor: holder })
                .or_insert(0.0) += each;
        } else if visited.contains(&w) {
            *diffused += each;
        } else {
            visited.push(w);
            expand(t, w, each, p_f, false, visited, hits, diffused);
            visited.pop();
        }
    }
}

/// Posterior from the decision tree of every honest originator, uniform prior.
pub fn tree_posterior(t: &Topology, p_f: f64, obs: &StemObservation) -> BTreeMap<NodeId, f64> {
    let lik: Vec<(NodeId, f64)> = t
        .honest_nodes()
        .map(|i| (i, stem_decision_tree(t, i, p_f).0.get(obs).copied().unwrap_or(0.0)))
        .collect();
    let total: f64 = lik.iter().map(|x| x.1).sum();
    lik.into_iter().filter(|x| x.1 > 0.0).map(|(i, l)| (i, l / total)).collect()
}

/// A snapshot document for a random channel graph with small integer fees, so ties occur.
pub fn random_snapshot(rng: &mut ChaCha8Rng, n: usize, channels: usize) -> String {
    let nodes: Vec<String> = (0..n).map(|i| format!("{{\"id\":\"n{i}\"}}")).collect();
    let mut ch = Vec::new();
    for c in 0..channels {
        let a = rng.gen_range(0..n);
        let mut b = rng.gen_range(0..n - 1);
        if b >= a {
            b += 1;
        }
        let policy = |rng: &mut ChaCha8Rng| {
            if rng.gen_bool(0.1) {
                "null".to_string()
            } else {
                format!(
                    "{{\"base_fee\":{},\"proportional_fee_rate\":{},\"timelock\":{}}}",
                    rng.gen_range(0..4) * 500,
                    rng.gen_range(0..3) as f64 * 1e-6,
                    [40, 144][rng.gen_range(0..2)]
                )
            }
        };
        let p1 = policy(rng);
        let p2 = policy(rng);
        ch.push(format!(
            "{{\"channel_id\":\"c{c}\",\"node1\":\"n{a}\",\"node2\":\"n{b}\",\"capacity\":{},\"node1_policy\":{p1},\"node2_policy\":{p2}}}",
            rng.gen_range(1..5) * 1000
        ));
    }
    format!("{{\"nodes\":[{}],\"channels\":[{}]}}", nodes.join(","), ch.join(","))
}

/// `amount * rate + base + amount * timelock * rf + bias`, or unit cost without a policy.
pub fn hop_cost(t: &Topology, u: NodeId, v: NodeId, params: &RoutingParams) -> f64 {
    match t.edge(u, v).unwrap().policy {
        Some(p) => {
            params.amount * p.proportional_fee_rate
                + p.base_fee
                + params.amount * p.timelock as f64 * params.rf
                + params.bias
        }
        None => 1.0 + params.bias,
    }
}

/// Every simple path from `s` to `d`, cheapest first, ties by id sequence.
pub fn all_routes(t: &Topology, s: NodeId, d: NodeId, params: &RoutingParams) -> Vec<(f64, Vec<NodeId>)> {
    fn dfs(
        t: &Topology,
        d: NodeId,
        params: &RoutingParams,
        path: &mut Vec<NodeId>,
        cost: f64,
        out: &mut Vec<(f64, Vec<NodeId>)>,
    ) {
        let u = *path.last().unwrap();
        if u == d {
            out.push((cost, path.clone()));
            return;
        }
        for v in t.successor_ids(u).collect::<Vec<_>>() {
            if !path.contains(&v) {
                let c = cost + hop_cost(t, u, v, params);
                path.push(v);
                dfs(t, d, params, path, c, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    dfs(t, d, params, &mut vec![s], 0.0, &mut out);
    out.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    out
}

/// The best-`k` route universe over ordered honest pairs.
pub fn route_universe(t: &Topology, params: &RoutingParams, k: usize) -> Vec<Vec<NodeId>> {
    let mut u = Vec::new();
    for s in t.honest_nodes() {
        for d in t.honest_nodes() {
            if s != d {
                u.extend(all_routes(t, s, d, params).into_iter().take(k).map(|r| r.1));
            }
        }
    }
    u
}

/// `(pred, first adversary, last adversary, succ)` on a route, if any intermediary is adversarial.
pub fn short_circuit(t: &Topology, r: &[NodeId]) -> Option<(NodeId, NodeId, NodeId, NodeId)> {
    let inner: Vec<usize> = (1..r.len().saturating_sub(1)).filter(|&i| t.is_adversarial(r[i])).collect();
    let (&f, &l) = (inner.first()?, inner.last()?);
    Some((r[f - 1], r[f], r[l], r[l + 1]))
}

/// Brute-force posterior `P(i | obs) ∝ SP_i(obs) / SP_i` under the uniform prior.
pub fn brute_ln_posterior(
    universe: &[Vec<NodeId>],
    matches: impl Fn(&[NodeId]) -> bool,
) -> BTreeMap<NodeId, f64> {
    let mut all: BTreeMap<NodeId, f64> = BTreeMap::new();
    let mut hit: BTreeMap<NodeId, f64> = BTreeMap::new();
    for r in universe {
        *all.entry(r[0]).or_insert(0.0) += 1.0;
        if matches(r) {
            *hit.entry(r[0]).or_insert(0.0) += 1.0;
        }
    }
    let lik: Vec<(NodeId, f64)> = hit.iter().map(|(i, h)| (*i, h / all[i])).collect();
    let total: f64 = lik.iter().map(|x| x.1).sum();
    lik.into_iter().map(|(i, l)| (i, l / total)).collect()
}

/// Strict-intermediary counts over best routes between ordered honest pairs.
pub fn brute_betweenness(t: &Topology, params: &RoutingParams) -> Vec<f64> {
    let mut c = vec![0.0; t.node_count()];
    for s in t.honest_nodes() {
        for d in t.honest_nodes() {
            if s == d {
                continue;
            }
            if let Some((_, r)) = all_routes(t, s, d, params).into_iter().next() {
                for m in &r[1..r.len() - 1] {
                    c[m.index()] += 1.0;
                }
            }
        }
    }
    c
}
