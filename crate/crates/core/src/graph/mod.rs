//! Network topologies: privacy subgraphs for the hop-by-hop schemes and
//! payment-channel graphs for source routing.

mod adversary;
mod centrality;
mod generate;
mod snapshot;
mod transform;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use adversary::{assign_adversaries, assign_adversaries_with, AdversarySpec, AdversaryStrategy};
pub use centrality::betweenness_centrality;
pub use generate::{
    derive_privacy_subgraph, GeneratorSpec, generate_k_regular, generate_line_graph, generate_quasi_4_regular,
    generate_scale_free, generate_weighted_random_graph,
};
pub use snapshot::{emit_snapshot, load_ln_snapshot, load_ln_snapshot_with_report, LoadReport};
pub use transform::{filter_by_amount, largest_connected_component};

/// Dense node index in `[0, N)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn from_index(i: usize) -> Self {
        NodeId(i as u32)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeRole {
    Honest,
    Adversarial,
}

/// Forwarding terms of one channel direction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelPolicy {
    /// Fraction of the amount charged per forward.
    pub proportional_fee_rate: f64,
    pub base_fee: f64,
    /// Blocks.
    pub timelock: u32,
    /// Total channel capacity, both directions together.
    pub capacity: u64,
}

impl ChannelPolicy {
    /// Liquidity assumed available in one direction: half the total capacity.
    pub fn directional_balance(&self) -> f64 {
        self.capacity as f64 / 2.0
    }
}

/// One directed arc. Arcs without a policy have unit routing cost.
#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub to: NodeId,
    pub policy: Option<ChannelPolicy>,
    /// Index into the topology's channel id table, for snapshot-derived arcs.
    pub channel: Option<u32>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum TopologyKind {
    Line,
    Quasi4Regular,
    KRegular { out_k: u32 },
    WeightedRandom,
    ScaleFree,
    LnSnapshot,
}

/// A directed graph with node roles. Immutable once built; transformations return new values.
#[derive(Clone, Debug)]
pub struct Topology {
    kind: TopologyKind,
    roles: Vec<NodeRole>,
    out: Vec<Vec<Edge>>,
    inc: Vec<Vec<NodeId>>,
    aliases: Vec<String>,
    channel_ids: Vec<String>,
}

impl Topology {
    /// Build from a list of arcs. Arcs are sorted per node by target; duplicate `(from, to)`
    /// pairs keep the first occurrence. Self-loops are rejected.
    pub(crate) fn from_arcs(
        kind: TopologyKind,
        n: usize,
        arcs: impl IntoIterator<Item = (NodeId, Edge)>,
    ) -> crate::Result<Self> {
        let aliases = (0..n).map(|i| i.to_string()).collect();
        Self::from_parts(kind, vec![NodeRole::Honest; n], aliases, Vec::new(), arcs)
    }

    /// Build from bare `(from, to)` pairs with no channel policies; all nodes honest.
    pub fn from_edge_list(kind: TopologyKind, n: usize, edges: &[(NodeId, NodeId)]) -> crate::Result<Self> {
        Self::from_arcs(
            kind,
            n,
            edges.iter().map(|&(from, to)| {
                (
                    from,
                    Edge {
                        to,
                        policy: None,
                        channel: None,
                    },
                )
            }),
        )
    }

    pub(crate) fn from_parts(
        kind: TopologyKind,
        roles: Vec<NodeRole>,
        aliases: Vec<String>,
        channel_ids: Vec<String>,
        arcs: impl IntoIterator<Item = (NodeId, Edge)>,
    ) -> crate::Result<Self> {
        let n = roles.len();
        debug_assert_eq!(aliases.len(), n);
        let mut out: Vec<Vec<Edge>> = vec![Vec::new(); n];
        for (from, edge) in arcs {
            if from.index() >= n || edge.to.index() >= n {
                return Err(crate::Error::invalid(format!(
                    "arc {from}->{} outside node range 0..{n}",
                    edge.to
                )));
            }
            if from == edge.to {
                return Err(crate::Error::invalid(format!("self-loop at node {from}")));
            }
            out[from.index()].push(edge);
        }
        let mut inc: Vec<Vec<NodeId>> = vec![Vec::new(); n];
        for (u, edges) in out.iter_mut().enumerate() {
            // stable sort keeps the first duplicate
            edges.sort_by_key(|e| e.to);
            edges.dedup_by_key(|e| e.to);
            for e in edges.iter() {
                inc[e.to.index()].push(NodeId::from_index(u));
            }
        }
        Ok(Topology {
            kind,
            roles,
            out,
            inc,
            aliases,
            channel_ids,
        })
    }

    pub fn kind(&self) -> TopologyKind {
        self.kind
    }

    pub fn node_count(&self) -> usize {
        self.roles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roles.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.node_count()).map(NodeId::from_index)
    }

    pub fn successors(&self, n: NodeId) -> &[Edge] {
        &self.out[n.index()]
    }

    pub fn successor_ids(&self, n: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.out[n.index()].iter().map(|e| e.to)
    }

    /// Nodes with an arc into `n`, ascending.
    pub fn predecessors(&self, n: NodeId) -> &[NodeId] {
        &self.inc[n.index()]
    }

    pub fn edge(&self, from: NodeId, to: NodeId) -> Option<&Edge> {
        let edges = &self.out[from.index()];
        edges
            .binary_search_by_key(&to, |e| e.to)
            .ok()
            .map(|i| &edges[i])
    }

    pub fn has_edge(&self, from: NodeId, to: NodeId) -> bool {
        self.edge(from, to).is_some()
    }

    pub fn out_degree(&self, n: NodeId) -> usize {
        self.out[n.index()].len()
    }

    pub fn in_degree(&self, n: NodeId) -> usize {
        self.inc[n.index()].len()
    }

    /// In-degree plus out-degree.
    pub fn degree(&self, n: NodeId) -> usize {
        self.out_degree(n) + self.in_degree(n)
    }

    pub fn role(&self, n: NodeId) -> NodeRole {
        self.roles[n.index()]
    }

    pub fn roles(&self) -> &[NodeRole] {
        &self.roles
    }

    pub fn is_adversarial(&self, n: NodeId) -> bool {
        self.roles[n.index()] == NodeRole::Adversarial
    }

    pub fn is_honest(&self, n: NodeId) -> bool {
        !self.is_adversarial(n)
    }

    pub fn honest_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes().filter(|&n| self.is_honest(n))
    }

    pub fn adversaries(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes().filter(|&n| self.is_adversarial(n))
    }

    pub fn honest_count(&self) -> usize {
        self.roles.iter().filter(|r| **r == NodeRole::Honest).count()
    }

    pub fn alias(&self, n: NodeId) -> &str {
        &self.aliases[n.index()]
    }

    pub fn aliases(&self) -> &[String] {
        &self.aliases
    }

    pub fn node_by_alias(&self, alias: &str) -> Option<NodeId> {
        self.aliases
            .iter()
            .position(|a| a == alias)
            .map(NodeId::from_index)
    }

    pub(crate) fn channel_ids(&self) -> &[String] {
        &self.channel_ids
    }

    /// Same arcs, new role assignment.
    pub fn with_roles(&self, roles: Vec<NodeRole>) -> crate::Result<Topology> {
        if roles.len() != self.node_count() {
            return Err(crate::Error::invalid(format!(
                "role vector has {} entries for {} nodes",
                roles.len(),
                self.node_count()
            )));
        }
        Ok(Topology {
            roles,
            ..self.clone()
        })
    }

    /// Mark exactly the listed nodes adversarial.
    pub fn with_adversaries(&self, adversaries: &[NodeId]) -> crate::Result<Topology> {
        let mut roles = vec![NodeRole::Honest; self.node_count()];
        for &a in adversaries {
            if a.index() >= roles.len() {
                return Err(crate::Error::invalid(format!("adversary {a} out of range")));
            }
            roles[a.index()] = NodeRole::Adversarial;
        }
        self.with_roles(roles)
    }

    /// All arcs as `(from, edge)` in ascending order.
    pub fn arcs(&self) -> impl Iterator<Item = (NodeId, &Edge)> + '_ {
        self.out
            .iter()
            .enumerate()
            .flat_map(|(u, es)| es.iter().map(move |e| (NodeId::from_index(u), e)))
    }
}
