use std::fmt;

use serde::Serialize;

use super::Route;
use crate::graph::{NodeId, Topology};

/// What colluding adversaries on one route record: the predecessor of the first adversarial
/// intermediary and the successor of the last one. Everything between them is ignored.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct LnObservation {
    pub predecessor: NodeId,
    pub first_adversary: NodeId,
    pub last_adversary: NodeId,
    pub successor: NodeId,
}

impl fmt::Display for LnObservation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "p={};first={};last={};s={}",
            self.predecessor, self.first_adversary, self.last_adversary, self.successor
        )
    }
}

/// The short-circuited observation for `route`, or `None` when no intermediary is adversarial.
/// Adversarial endpoints are not intermediaries.
pub fn observations_from_route(route: &Route, t: &Topology) -> Option<LnObservation> {
    observe_with(&route.nodes, |n| t.is_adversarial(n))
}

pub(crate) fn observe_with(
    nodes: &[NodeId],
    adversarial: impl Fn(NodeId) -> bool,
) -> Option<LnObservation> {
    if nodes.len() < 3 {
        return None;
    }
    let interior = 1..nodes.len() - 1;
    let first = interior.clone().find(|&i| adversarial(nodes[i]))?;
    let last = interior.rev().find(|&i| adversarial(nodes[i]))?;
    Some(LnObservation {
        predecessor: nodes[first - 1],
        first_adversary: nodes[first],
        last_adversary: nodes[last],
        successor: nodes[last + 1],
    })
}

/// The `(predecessor, adversary, successor)` triple `adversary` alone sees on `route`, if it is
/// an intermediary there. Used when adversaries do not pool observations.
pub fn single_node_view(route: &Route, adversary: NodeId) -> Option<(NodeId, NodeId, NodeId)> {
    let n = route.nodes.len();
    let pos = route.nodes[1..n.saturating_sub(1)]
        .iter()
        .position(|&x| x == adversary)?
        + 1;
    Some((route.nodes[pos - 1], adversary, route.nodes[pos + 1]))
}
