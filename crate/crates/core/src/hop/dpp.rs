use super::{check_observation, check_p_f, PathEnumerationBounds, StemObservation};
use crate::graph::{NodeId, Topology};
use crate::posterior::{ObservationKey, Posterior, Prior};
use crate::{Error, Result};

/// Simple paths `i -> ... -> obs.predecessor -> obs.adversary` whose nodes before the adversary
/// are all honest, with at most `bounds.max_hops` hops, in id-sequence order.
pub fn enumerate_stem_paths(
    t: &Topology,
    i: NodeId,
    obs: &StemObservation,
    bounds: &PathEnumerationBounds,
) -> Vec<Vec<NodeId>> {
    let mut out = Vec::new();
    if !t.is_honest(i) || t.is_adversarial(obs.predecessor) || !t.has_edge(obs.predecessor, obs.adversary) {
        return out;
    }
    let mut path = vec![i];
    forward(t, obs, bounds.max_hops, &mut path, &mut out);
    out.sort();
    out
}

fn forward(
    t: &Topology,
    obs: &StemObservation,
    max_hops: usize,
    path: &mut Vec<NodeId>,
    out: &mut Vec<Vec<NodeId>>,
) {
    let u = *path.last().expect("non-empty");
    if u == obs.predecessor {
        let mut p = path.clone();
        p.push(obs.adversary);
        out.push(p);
        return;
    }
    // appending a node and then the adversary adds two hops
    if path.len() + 1 > max_hops {
        return;
    }
    for w in t.successor_ids(u) {
        if t.is_honest(w) && !path.contains(&w) {
            path.push(w);
            forward(t, obs, max_hops, path, out);
            path.pop();
        }
    }
}

/// Weight of one stem path: the originator picks its successor uniformly, each later honest
/// node forwards with probability `p_f` to a uniform successor.
fn path_weight(t: &Topology, path: &[NodeId], p_f: f64) -> f64 {
    let mut w = 1.0 / t.out_degree(path[0]) as f64;
    for &v in &path[1..path.len() - 1] {
        w *= p_f / t.out_degree(v) as f64;
    }
    w
}

/// `P(obs | i originated)`: the summed weight of every stem path from `i` that reaches the
/// adversary through the observed predecessor. Paths weighing less than
/// `bounds.min_contribution` are skipped.
pub fn dpp_forward_probability(
    t: &Topology,
    i: NodeId,
    obs: &StemObservation,
    p_f: f64,
    bounds: &PathEnumerationBounds,
) -> f64 {
    enumerate_stem_paths(t, i, obs, bounds)
        .iter()
        .map(|p| path_weight(t, p, p_f))
        .filter(|&w| w >= bounds.min_contribution)
        .sum()
}

/// Likelihood of `obs` for every honest originator with non-zero likelihood, ascending by
/// node. Walks stem paths backwards from the predecessor so all originators are handled in one
/// pass; a partial path is abandoned once its weight drops below `bounds.min_contribution`.
pub fn dpp_likelihoods(
    t: &Topology,
    p_f: f64,
    obs: &StemObservation,
    bounds: &PathEnumerationBounds,
) -> Result<Vec<(NodeId, f64)>> {
    check_p_f(p_f)?;
    check_observation(t, obs)?;
    let mut acc = vec![0.0; t.node_count()];
    let mut on_path = vec![false; t.node_count()];
    on_path[obs.predecessor.index()] = true;
    backward(t, p_f, bounds, obs.predecessor, 1.0, 1, &mut on_path, &mut acc);
    Ok(acc
        .into_iter()
        .enumerate()
        .filter(|&(_, l)| l > 0.0)
        .map(|(v, l)| (NodeId::from_index(v), l))
        .collect())
}

/// `u` is the earliest node of a partial path with `hops` hops to the adversary; `suffix` is
/// the forwarding weight of the nodes after `u`.
#[allow(clippy::too_many_arguments)]
fn backward(
    t: &Topology,
    p_f: f64,
    bounds: &PathEnumerationBounds,
    u: NodeId,
    suffix: f64,
    hops: usize,
    on_path: &mut [bool],
    acc: &mut [f64],
) {
    let fanout = t.out_degree(u) as f64;
    acc[u.index()] += suffix / fanout;
    if hops >= bounds.max_hops {
        return;
    }
    let next = suffix * p_f / fanout;
    if next < bounds.min_contribution || next == 0.0 {
        return;
    }
    for &w in t.predecessors(u) {
        if t.is_honest(w) && !on_path[w.index()] {
            on_path[w.index()] = true;
            backward(t, p_f, bounds, w, next, hops + 1, on_path, acc);
            on_path[w.index()] = false;
        }
    }
}

pub fn dpp_posterior(
    t: &Topology,
    p_f: f64,
    obs: &StemObservation,
    bounds: &PathEnumerationBounds,
    prior: &Prior,
) -> Result<Posterior> {
    let lik = dpp_likelihoods(t, p_f, obs, bounds)?;
    Posterior::from_likelihoods(ObservationKey::Stem(*obs), lik, prior).map_err(|e| match e {
        Error::ImpossibleObservation(_) => Error::ImpossibleObservation(format!(
            "{obs}: no honest stem path within {} hops",
            bounds.max_hops
        )),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Edge, TopologyKind};
    use crate::metrics::shannon_entropy;

    const S: u32 = 0;
    const X: u32 = 1;
    const A: u32 = 2;

    fn graph(n: usize, arcs: &[(u32, u32)], adversaries: &[u32]) -> Topology {
        let arcs = arcs
            .iter()
            .map(|&(a, b)| (NodeId(a), Edge { to: NodeId(b), policy: None, channel: None }));
        let adv: Vec<NodeId> = adversaries.iter().map(|&a| NodeId(a)).collect();
        Topology::from_arcs(TopologyKind::Quasi4Regular, n, arcs)
            .unwrap()
            .with_adversaries(&adv)
            .unwrap()
    }

    fn sxa() -> Topology {
        graph(3, &[(S, X), (S, A), (X, A), (X, S)], &[A])
    }

    fn obs() -> StemObservation {
        StemObservation { adversary: NodeId(A), predecessor: NodeId(X) }
    }

    #[test]
    fn sxa_paths() {
        let t = sxa();
        let b = PathEnumerationBounds::default();
        let paths = enumerate_stem_paths(&t, NodeId(S), &obs(), &b);
        assert_eq!(paths, vec![vec![NodeId(S), NodeId(X), NodeId(A)]]);
        let from_x = enumerate_stem_paths(&t, NodeId(X), &obs(), &b);
        assert_eq!(from_x, vec![vec![NodeId(X), NodeId(A)]]);
    }

    #[test]
    fn sxa_forward_probabilities() {
        let t = sxa();
        let b = PathEnumerationBounds::default();
        assert!((dpp_forward_probability(&t, NodeId(S), &obs(), 0.9, &b) - 0.225).abs() < 1e-15);
        assert!((dpp_forward_probability(&t, NodeId(X), &obs(), 0.9, &b) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn sxa_posterior() {
        let t = sxa();
        let p = dpp_posterior(&t, 0.9, &obs(), &PathEnumerationBounds::default(), &Prior::Uniform)
            .unwrap();
        assert!((p.probability(NodeId(X)) - 0.5 / 0.725).abs() < 1e-12);
        assert!((p.probability(NodeId(S)) - 0.225 / 0.725).abs() < 1e-12);
        assert!((shannon_entropy(&p).unwrap() - 0.893_5).abs() < 1e-4);
    }

    #[test]
    fn walled_off_nodes_get_zero() {
        // 0 -> 1 -> A4 -> 2 -> A5 ; 3 -> 2 ; nodes 0 and 1 can only reach A5 through A4
        let t = graph(6, &[(0, 1), (1, 4), (4, 2), (2, 5), (3, 2), (2, 3)], &[4, 5]);
        let o = StemObservation { adversary: NodeId(5), predecessor: NodeId(2) };
        let p = dpp_posterior(&t, 0.9, &o, &PathEnumerationBounds::default(), &Prior::Uniform)
            .unwrap();
        assert_eq!(p.probability(NodeId(0)), 0.0);
        assert_eq!(p.probability(NodeId(1)), 0.0);
        assert!(p.probability(NodeId(3)) > 0.0);
    }

    #[test]
    fn backward_pass_matches_forward_sum() {
        let t = crate::graph::generate_quasi_4_regular(9, 4)
            .unwrap()
            .with_adversaries(&[NodeId(0), NodeId(5)])
            .unwrap();
        let b = PathEnumerationBounds::exhaustive(9);
        for j in [NodeId(0), NodeId(5)] {
            for &p in t.predecessors(j) {
                if t.is_adversarial(p) {
                    continue;
                }
                let o = StemObservation { adversary: j, predecessor: p };
                let lik = dpp_likelihoods(&t, 0.7, &o, &b).unwrap();
                for i in t.honest_nodes() {
                    let want = dpp_forward_probability(&t, i, &o, 0.7, &b);
                    let got = lik.iter().find(|x| x.0 == i).map_or(0.0, |x| x.1);
                    assert!((want - got).abs() < 1e-15, "{i}: {want} vs {got}");
                }
            }
        }
    }
}
