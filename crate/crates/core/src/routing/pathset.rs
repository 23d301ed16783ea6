use rayon::prelude::*;

use super::{best_k_paths, best_route_tree, Route, RoutingParams};
use crate::graph::{NodeId, Topology};
use crate::{Error, Result};

/// Routes for one ordered pair, best first.
#[derive(Clone, Debug, PartialEq)]
pub struct PairRoutes {
    pub destination: NodeId,
    pub routes: Vec<Route>,
}

/// Best-k routes for every ordered honest pair that is connected.
#[derive(Clone, Debug, PartialEq)]
pub struct PathSet {
    k: usize,
    node_count: usize,
    adversarial: Vec<bool>,
    by_source: Vec<Vec<PairRoutes>>,
}

impl PathSet {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn is_adversarial(&self, n: NodeId) -> bool {
        self.adversarial[n.index()]
    }

    /// Pairs originating at `src`, ascending by destination.
    pub fn from_source(&self, src: NodeId) -> &[PairRoutes] {
        &self.by_source[src.index()]
    }

    pub fn routes(&self, src: NodeId, dst: NodeId) -> Option<&[Route]> {
        let pairs = &self.by_source[src.index()];
        pairs
            .binary_search_by_key(&dst, |p| p.destination)
            .ok()
            .map(|i| pairs[i].routes.as_slice())
    }

    /// Number of routes originating at `src`.
    pub fn routes_from(&self, src: NodeId) -> usize {
        self.by_source[src.index()].iter().map(|p| p.routes.len()).sum()
    }

    pub fn pair_count(&self) -> usize {
        self.by_source.iter().map(Vec::len).sum()
    }

    pub fn route_count(&self) -> usize {
        self.by_source
            .iter()
            .flat_map(|v| v.iter())
            .map(|p| p.routes.len())
            .sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Route> + '_ {
        self.by_source
            .iter()
            .flat_map(|v| v.iter())
            .flat_map(|p| p.routes.iter())
    }
}

fn routes_from_source(
    t: &Topology,
    src: NodeId,
    params: &RoutingParams,
    k: usize,
) -> Vec<PairRoutes> {
    if k == 1 {
        best_route_tree(t, src, params)
            .into_iter()
            .enumerate()
            .filter_map(|(d, r)| {
                let d = NodeId::from_index(d);
                let r = r?;
                t.is_honest(d).then(|| PairRoutes {
                    destination: d,
                    routes: vec![r],
                })
            })
            .collect()
    } else {
        t.honest_nodes()
            .filter(|&d| d != src)
            .filter_map(|d| {
                let routes = best_k_paths(t, src, d, params, k).expect("valid endpoints");
                (!routes.is_empty()).then_some(PairRoutes {
                    destination: d,
                    routes,
                })
            })
            .collect()
    }
}

/// Best-k routes for every ordered pair of honest nodes. Sources are processed in parallel.
pub fn build_path_set(t: &Topology, params: &RoutingParams, k: usize) -> Result<PathSet> {
    if k == 0 {
        return Err(Error::invalid("k must be >= 1"));
    }
    let by_source: Vec<Vec<PairRoutes>> = (0..t.node_count())
        .into_par_iter()
        .map(|s| {
            let s = NodeId::from_index(s);
            if t.is_adversarial(s) {
                Vec::new()
            } else {
                routes_from_source(t, s, params, k)
            }
        })
        .collect();
    Ok(PathSet {
        k,
        node_count: t.node_count(),
        adversarial: t.nodes().map(|n| t.is_adversarial(n)).collect(),
        by_source,
    })
}
