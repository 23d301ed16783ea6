use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeSet, BinaryHeap, HashSet};

use serde::Serialize;

use super::RoutingParams;
use crate::graph::{Edge, NodeId, Topology};
use crate::{Error, Result};

/// A loopless route from `nodes[0]` to the last node.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Route {
    pub nodes: Vec<NodeId>,
    /// Sum of hop costs, accumulated in route order.
    pub total_cost: f64,
}

impl Route {
    pub fn source(&self) -> NodeId {
        self.nodes[0]
    }

    pub fn destination(&self) -> NodeId {
        *self.nodes.last().expect("route has nodes")
    }

    pub fn hops(&self) -> usize {
        self.nodes.len() - 1
    }
}

impl Eq for Route {}

impl Ord for Route {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total_cost
            .total_cmp(&other.total_cost)
            .then_with(|| self.nodes.cmp(&other.nodes))
    }
}

impl PartialOrd for Route {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub(crate) fn arc_cost(e: &Edge, params: &RoutingParams) -> f64 {
    match &e.policy {
        Some(p) => super::edge_cost(params.amount, p, params.rf, params.bias),
        None => 1.0 + params.bias,
    }
}

/// Cost of a node sequence, or `None` if some hop is not an arc.
pub fn route_cost(t: &Topology, nodes: &[NodeId], params: &RoutingParams) -> Option<f64> {
    let mut cost = 0.0;
    for w in nodes.windows(2) {
        cost += arc_cost(t.edge(w[0], w[1])?, params);
    }
    Some(cost)
}

struct Search<'a> {
    banned_nodes: &'a [NodeId],
    banned_arcs: &'a HashSet<(NodeId, NodeId)>,
    target: Option<NodeId>,
}

/// Dijkstra over `(cost, node sequence)` labels. Extending a label never makes it smaller in
/// that order, so the first label settled at a node is its cheapest route with the
/// lexicographically smallest id sequence among equal-cost routes.
fn lex_dijkstra(
    t: &Topology,
    start: Route,
    params: &RoutingParams,
    search: &Search<'_>,
) -> Vec<Option<Route>> {
    let n = t.node_count();
    let mut settled: Vec<Option<Route>> = vec![None; n];
    let mut blocked = vec![false; n];
    for &b in search.banned_nodes {
        blocked[b.index()] = true;
    }
    let mut heap = BinaryHeap::new();
    heap.push(Reverse(start));
    while let Some(Reverse(label)) = heap.pop() {
        let v = label.destination();
        if settled[v.index()].is_some() {
            continue;
        }
        for e in t.successors(v) {
            let w = e.to;
            if settled[w.index()].is_some()
                || blocked[w.index()]
                || search.banned_arcs.contains(&(v, w))
            {
                continue;
            }
            let mut nodes = Vec::with_capacity(label.nodes.len() + 1);
            nodes.extend_from_slice(&label.nodes);
            nodes.push(w);
            heap.push(Reverse(Route {
                nodes,
                total_cost: label.total_cost + arc_cost(e, params),
            }));
        }
        let done = search.target == Some(v);
        settled[v.index()] = Some(label);
        if done {
            break;
        }
    }
    settled
}

fn start_at(src: NodeId) -> Route {
    Route {
        nodes: vec![src],
        total_cost: 0.0,
    }
}

fn check_endpoints(t: &Topology, src: NodeId, dst: NodeId) -> Result<()> {
    let n = t.node_count();
    if src.index() >= n || dst.index() >= n {
        return Err(Error::invalid(format!("endpoint out of range 0..{n}")));
    }
    if src == dst {
        return Err(Error::invalid(format!("source and destination are both {src}")));
    }
    Ok(())
}

/// Best route from `src` to every node (index `src` itself is `None`).
pub fn best_route_tree(t: &Topology, src: NodeId, params: &RoutingParams) -> Vec<Option<Route>> {
    let none = HashSet::new();
    let search = Search {
        banned_nodes: &[],
        banned_arcs: &none,
        target: None,
    };
    let mut tree = lex_dijkstra(t, start_at(src), params, &search);
    tree[src.index()] = None;
    tree
}

/// Cheapest route under the routing cost, ties broken toward the smaller id sequence.
pub fn best_path(
    t: &Topology,
    src: NodeId,
    dst: NodeId,
    params: &RoutingParams,
) -> Result<Option<Route>> {
    check_endpoints(t, src, dst)?;
    let none = HashSet::new();
    let search = Search {
        banned_nodes: &[],
        banned_arcs: &none,
        target: Some(dst),
    };
    Ok(lex_dijkstra(t, start_at(src), params, &search)[dst.index()].take())
}

/// Up to `k` loopless routes in `(cost, id sequence)` order (Yen's algorithm).
pub fn best_k_paths(
    t: &Topology,
    src: NodeId,
    dst: NodeId,
    params: &RoutingParams,
    k: usize,
) -> Result<Vec<Route>> {
    if k == 0 {
        return Err(Error::invalid("k must be >= 1"));
    }
    let Some(first) = best_path(t, src, dst, params)? else {
        return Ok(Vec::new());
    };
    let mut accepted = vec![first];
    let mut candidates: BTreeSet<Route> = BTreeSet::new();
    while accepted.len() < k {
        let prev = accepted.last().expect("non-empty").clone();
        for i in 0..prev.nodes.len() - 1 {
            let root = &prev.nodes[..=i];
            let banned_arcs: HashSet<(NodeId, NodeId)> = accepted
                .iter()
                .filter(|r| r.nodes.len() > i + 1 && &r.nodes[..=i] == root)
                .map(|r| (r.nodes[i], r.nodes[i + 1]))
                .collect();
            let root_route = Route {
                nodes: root.to_vec(),
                total_cost: route_cost(t, root, params).expect("root follows arcs"),
            };
            let search = Search {
                banned_nodes: &root[..i],
                banned_arcs: &banned_arcs,
                target: Some(dst),
            };
            if let Some(r) = lex_dijkstra(t, root_route, params, &search)[dst.index()].take() {
                candidates.insert(r);
            }
        }
        let next = loop {
            match candidates.pop_first() {
                Some(c) if accepted.contains(&c) => continue,
                other => break other,
            }
        };
        match next {
            Some(r) => accepted.push(r),
            None => break,
        }
    }
    Ok(accepted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{ChannelPolicy, TopologyKind};

    fn fee(base: f64) -> Option<ChannelPolicy> {
        Some(ChannelPolicy {
            proportional_fee_rate: 0.0,
            base_fee: base,
            timelock: 0,
            capacity: 100,
        })
    }

    fn graph(n: usize, arcs: &[(u32, u32, f64)], both: bool) -> Topology {
        let mut v = Vec::new();
        for &(a, b, c) in arcs {
            v.push((NodeId(a), Edge { to: NodeId(b), policy: fee(c), channel: None }));
            if both {
                v.push((NodeId(b), Edge { to: NodeId(a), policy: fee(c), channel: None }));
            }
        }
        Topology::from_arcs(TopologyKind::WeightedRandom, n, v).unwrap()
    }

    fn ids(r: &Route) -> Vec<u32> {
        r.nodes.iter().map(|n| n.0).collect()
    }

    fn params() -> RoutingParams {
        RoutingParams { amount: 0.0, rf: 0.0, bias: 0.0 }
    }

    #[test]
    fn unit_path() {
        let t = graph(4, &[(1, 2, 1.0), (2, 3, 1.0)], true);
        let r = best_path(&t, NodeId(1), NodeId(3), &params()).unwrap().unwrap();
        assert_eq!(ids(&r), vec![1, 2, 3]);
        assert_eq!(r.total_cost, 2.0);
        assert!(best_path(&t, NodeId(1), NodeId(0), &params()).unwrap().is_none());
        assert!(best_path(&t, NodeId(1), NodeId(1), &params()).is_err());
    }

    #[test]
    fn equal_cost_tie_goes_to_smaller_id() {
        let t = graph(5, &[(0, 4, 1.0), (4, 3, 1.0), (0, 2, 1.0), (2, 3, 1.0)], true);
        let r = best_path(&t, NodeId(0), NodeId(3), &params()).unwrap().unwrap();
        assert_eq!(ids(&r), vec![0, 2, 3]);
    }

    #[test]
    fn triangle_best_two() {
        // 0-1 cost 1, 1-2 cost 1, 0-2 cost 3
        let t = graph(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 3.0)], true);
        let rs = best_k_paths(&t, NodeId(0), NodeId(2), &params(), 2).unwrap();
        assert_eq!(rs.len(), 2);
        assert_eq!(ids(&rs[0]), vec![0, 1, 2]);
        assert_eq!(rs[0].total_cost, 2.0);
        assert_eq!(ids(&rs[1]), vec![0, 2]);
        assert_eq!(rs[1].total_cost, 3.0);
        // only two loopless routes exist
        assert_eq!(best_k_paths(&t, NodeId(0), NodeId(2), &params(), 5).unwrap().len(), 2);
    }

    #[test]
    fn k1_equals_best_path() {
        let t = graph(5, &[(0, 1, 2.0), (1, 4, 2.0), (0, 2, 1.0), (2, 3, 1.0), (3, 4, 1.0)], true);
        let bp = best_path(&t, NodeId(0), NodeId(4), &params()).unwrap().unwrap();
        let k1 = best_k_paths(&t, NodeId(0), NodeId(4), &params(), 1).unwrap();
        assert_eq!(k1, vec![bp]);
    }

    #[test]
    fn tree_matches_point_queries() {
        let t = graph(6, &[(0, 1, 2.0), (1, 2, 1.0), (0, 3, 1.0), (3, 2, 2.0), (2, 4, 1.0)], true);
        let tree = best_route_tree(&t, NodeId(0), &params());
        assert!(tree[0].is_none());
        assert!(tree[5].is_none());
        for d in 1..5 {
            let p = best_path(&t, NodeId(0), NodeId(d), &params()).unwrap();
            assert_eq!(tree[d as usize], p);
        }
    }
}
