use std::cmp::Reverse;

use rand::seq::index;
use serde::{Deserialize, Serialize};

use super::{betweenness_centrality, NodeId, Topology};
use crate::rng::from_seed;
use crate::routing::RoutingParams;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdversaryStrategy {
    /// Uniform without replacement.
    Random,
    /// Highest in+out degree.
    TopDegree,
    /// Highest best-route betweenness.
    TopBetweenness,
}

/// How many adversaries to place and how to pick them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdversarySpec {
    pub strategy: AdversaryStrategy,
    pub count: usize,
}

impl AdversarySpec {
    pub fn apply(&self, t: &Topology, seed: u64, params: &RoutingParams) -> Result<Topology> {
        assign_adversaries_with(t, self.strategy, self.count, seed, params)
    }
}

/// Mark exactly `count` nodes adversarial; all others become honest. Ranked strategies break
/// ties toward the smaller id. Betweenness uses default routing parameters.
pub fn assign_adversaries(
    t: &Topology,
    strategy: AdversaryStrategy,
    count: usize,
    seed: u64,
) -> Result<Topology> {
    assign_adversaries_with(t, strategy, count, seed, &RoutingParams::default())
}

/// As [`assign_adversaries`], with the routing parameters used to rank by betweenness.
pub fn assign_adversaries_with(
    t: &Topology,
    strategy: AdversaryStrategy,
    count: usize,
    seed: u64,
    params: &RoutingParams,
) -> Result<Topology> {
    let n = t.node_count();
    if count == 0 || count >= n {
        return Err(Error::invalid(format!(
            "adversary count must be in 1..{n}, got {count}"
        )));
    }
    let chosen: Vec<NodeId> = match strategy {
        AdversaryStrategy::Random => {
            let mut rng = from_seed(seed);
            index::sample(&mut rng, n, count)
                .into_iter()
                .map(NodeId::from_index)
                .collect()
        }
        AdversaryStrategy::TopDegree => {
            let mut order: Vec<NodeId> = t.nodes().collect();
            order.sort_by_key(|&v| (Reverse(t.degree(v)), v));
            order.truncate(count);
            order
        }
        AdversaryStrategy::TopBetweenness => {
            // ranking is computed as if every node were honest
            let fresh = t.with_adversaries(&[])?;
            let c = betweenness_centrality(&fresh, params);
            let mut order: Vec<NodeId> = t.nodes().collect();
            order.sort_by(|a, b| c[b.index()].total_cmp(&c[a.index()]).then(a.cmp(b)));
            order.truncate(count);
            order
        }
    };
    t.with_adversaries(&chosen)
}
