use rayon::prelude::*;

use super::{NodeId, Topology};
use crate::routing::{best_route_tree, RoutingParams};

/// How often each node is a strict intermediary on the best route between ordered honest
/// pairs. Counts are raw (not normalized), indexed by node id.
pub fn betweenness_centrality(t: &Topology, params: &RoutingParams) -> Vec<f64> {
    let n = t.node_count();
    let per_source: Vec<Vec<u64>> = (0..n)
        .into_par_iter()
        .filter(|&s| t.is_honest(NodeId::from_index(s)))
        .map(|s| {
            let mut counts = vec![0u64; n];
            for (d, route) in best_route_tree(t, NodeId::from_index(s), params)
                .into_iter()
                .enumerate()
            {
                let Some(route) = route else { continue };
                if !t.is_honest(NodeId::from_index(d)) {
                    continue;
                }
                for m in &route.nodes[1..route.nodes.len() - 1] {
                    counts[m.index()] += 1;
                }
            }
            counts
        })
        .collect();
    let mut total = vec![0u64; n];
    for c in per_source {
        for (acc, x) in total.iter_mut().zip(c) {
            *acc += x;
        }
    }
    total.into_iter().map(|c| c as f64).collect()
}
