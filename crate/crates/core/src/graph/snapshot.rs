//! Payment-channel snapshot documents (JSON).
//!
//! ```json
//! {
//!   "nodes": [{"id": "alice"}, {"id": "bob"}],
//!   "channels": [{
//!     "channel_id": "c1", "node1": "alice", "node2": "bob", "capacity": 100000,
//!     "node1_policy": {"base_fee": 1000, "proportional_fee_rate": 0.000001, "timelock": 40},
//!     "node2_policy": null
//!   }],
//!   "roles": ["honest", "adversarial"]
//! }
//! ```
//!
//! A policy describes the direction leaving that node; a missing policy omits the direction.
//! Parallel channels between the same pair collapse to the cheapest policy per direction.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{ChannelPolicy, Edge, NodeId, NodeRole, Topology, TopologyKind};
use crate::routing::{edge_cost, DEFAULT_RF};
use crate::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeDoc {
    id: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolicyDoc {
    base_fee: u64,
    proportional_fee_rate: f64,
    timelock: u32,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelDoc {
    channel_id: String,
    node1: String,
    node2: String,
    capacity: u64,
    #[serde(default)]
    node1_policy: Option<PolicyDoc>,
    #[serde(default)]
    node2_policy: Option<PolicyDoc>,
}

#[derive(Debug, Serialize)]
struct SnapshotDoc {
    nodes: Vec<NodeDoc>,
    channels: Vec<ChannelDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    roles: Option<Vec<NodeRole>>,
}

/// A direction dropped while collapsing parallel channels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CollapsedDirection {
    pub from: String,
    pub to: String,
    pub kept_channel: String,
    pub dropped_channel: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct LoadReport {
    pub channels_read: usize,
    pub collapsed: Vec<CollapsedDirection>,
}

fn parse_err(record: impl Into<String>, message: impl ToString) -> Error {
    Error::Parse {
        record: record.into(),
        message: message.to_string(),
    }
}

pub fn load_ln_snapshot(document: &str) -> Result<Topology> {
    load_ln_snapshot_with_report(document).map(|(t, _)| t)
}

pub fn load_ln_snapshot_with_report(document: &str) -> Result<(Topology, LoadReport)> {
    let root: Value = serde_json::from_str(document).map_err(|e| parse_err("document", e))?;
    let obj = root
        .as_object()
        .ok_or_else(|| parse_err("document", "top level must be an object"))?;
    for key in obj.keys() {
        if !matches!(key.as_str(), "nodes" | "channels" | "roles") {
            return Err(parse_err("document", format!("unknown key `{key}`")));
        }
    }
    let list = |key: &str| -> Result<&Vec<Value>> {
        obj.get(key)
            .ok_or_else(|| parse_err("document", format!("missing `{key}`")))?
            .as_array()
            .ok_or_else(|| parse_err(key, "must be a list"))
    };

    let mut aliases = Vec::new();
    let mut by_alias: HashMap<String, NodeId> = HashMap::new();
    for (i, v) in list("nodes")?.iter().enumerate() {
        let node: NodeDoc =
            serde_json::from_value(v.clone()).map_err(|e| parse_err(format!("nodes[{i}]"), e))?;
        if by_alias.contains_key(&node.id) {
            return Err(Error::DuplicateRecord(format!("nodes[{i}]: node `{}`", node.id)));
        }
        by_alias.insert(node.id.clone(), NodeId::from_index(aliases.len()));
        aliases.push(node.id);
    }
    let n = aliases.len();

    let mut channel_ids: Vec<String> = Vec::new();
    let mut seen_channels: HashMap<String, usize> = HashMap::new();
    // (from, to) -> (channel index, policy)
    let mut best: BTreeMap<(NodeId, NodeId), (u32, ChannelPolicy)> = BTreeMap::new();
    let mut report = LoadReport::default();
    for (i, v) in list("channels")?.iter().enumerate() {
        let record = || {
            let id = v.get("channel_id").and_then(Value::as_str).unwrap_or("?");
            format!("channels[{i}] (channel_id={id})")
        };
        let ch: ChannelDoc = serde_json::from_value(v.clone()).map_err(|e| parse_err(record(), e))?;
        if seen_channels.contains_key(&ch.channel_id) {
            return Err(Error::DuplicateRecord(format!(
                "{}: channel id `{}` repeated",
                record(),
                ch.channel_id
            )));
        }
        let lookup = |alias: &str| {
            by_alias
                .get(alias)
                .copied()
                .ok_or_else(|| parse_err(record(), format!("unknown node `{alias}`")))
        };
        let a = lookup(&ch.node1)?;
        let b = lookup(&ch.node2)?;
        if a == b {
            return Err(parse_err(record(), "channel endpoints are the same node"));
        }
        if ch.capacity == 0 {
            return Err(parse_err(record(), "capacity must be positive"));
        }
        let idx = channel_ids.len() as u32;
        seen_channels.insert(ch.channel_id.clone(), channel_ids.len());
        channel_ids.push(ch.channel_id.clone());
        report.channels_read += 1;

        for (from, to, doc) in [(a, b, &ch.node1_policy), (b, a, &ch.node2_policy)] {
            let Some(doc) = doc else { continue };
            if !(doc.proportional_fee_rate.is_finite() && doc.proportional_fee_rate >= 0.0) {
                return Err(parse_err(record(), "proportional_fee_rate must be non-negative"));
            }
            let policy = ChannelPolicy {
                proportional_fee_rate: doc.proportional_fee_rate,
                base_fee: doc.base_fee as f64,
                timelock: doc.timelock,
                capacity: ch.capacity,
            };
            match best.get_mut(&(from, to)) {
                None => {
                    best.insert((from, to), (idx, policy));
                }
                Some(slot) => {
                    let cost = |p: &ChannelPolicy| edge_cost(1.0, p, DEFAULT_RF, 0.0);
                    let (kept, dropped) = if cost(&policy) < cost(&slot.1) {
                        let old = slot.0;
                        *slot = (idx, policy);
                        (idx, old)
                    } else {
                        (slot.0, idx)
                    };
                    report.collapsed.push(CollapsedDirection {
                        from: aliases[from.index()].clone(),
                        to: aliases[to.index()].clone(),
                        kept_channel: channel_ids[kept as usize].clone(),
                        dropped_channel: channel_ids[dropped as usize].clone(),
                    });
                }
            }
        }
    }

    let roles = match obj.get("roles") {
        None | Some(Value::Null) => vec![NodeRole::Honest; n],
        Some(v) => {
            let roles: Vec<NodeRole> =
                serde_json::from_value(v.clone()).map_err(|e| parse_err("roles", e))?;
            if roles.len() != n {
                return Err(parse_err(
                    "roles",
                    format!("{} roles for {n} nodes", roles.len()),
                ));
            }
            roles
        }
    };

    let arcs = best.into_iter().map(|((from, to), (idx, policy))| {
        (
            from,
            Edge {
                to,
                policy: Some(policy),
                channel: Some(idx),
            },
        )
    });
    let t = Topology::from_parts(TopologyKind::LnSnapshot, roles, aliases, channel_ids, arcs)?;
    Ok((t, report))
}

fn policy_doc(p: &Option<ChannelPolicy>) -> PolicyDoc {
    match p {
        Some(p) => PolicyDoc {
            base_fee: p.base_fee.round() as u64,
            proportional_fee_rate: p.proportional_fee_rate,
            timelock: p.timelock,
        },
        // unit-cost arc
        None => PolicyDoc {
            base_fee: 1,
            proportional_fee_rate: 0.0,
            timelock: 0,
        },
    }
}

fn capacity_of(p: &Option<ChannelPolicy>) -> u64 {
    p.map(|p| p.capacity).unwrap_or(2)
}

/// Serialize a topology in snapshot form. Snapshot-derived arcs are grouped back into their
/// channels (in channel order); other arcs are paired with their reverse arc when one exists and
/// named `"<u>-<v>"`. Arcs without a policy are written as unit-fee policies with capacity 2.
pub fn emit_snapshot(t: &Topology, include_roles: bool) -> String {
    let nodes = t
        .aliases()
        .iter()
        .map(|a| NodeDoc { id: a.clone() })
        .collect();

    // channel index -> (lower endpoint, higher endpoint, forward edge, backward edge)
    type Dirs<'a> = (NodeId, NodeId, Option<&'a Edge>, Option<&'a Edge>);
    let mut by_channel: BTreeMap<u32, Dirs> = BTreeMap::new();
    let mut loose: Vec<Dirs> = Vec::new();
    for (u, e) in t.arcs() {
        let (lo, hi) = (u.min(e.to), u.max(e.to));
        let forward = u == lo;
        match e.channel {
            Some(c) => {
                let slot = by_channel.entry(c).or_insert((lo, hi, None, None));
                if forward {
                    slot.2 = Some(e);
                } else {
                    slot.3 = Some(e);
                }
            }
            None => {
                if forward {
                    let back = t.edge(e.to, u).filter(|b| b.channel.is_none());
                    loose.push((lo, hi, Some(e), back));
                } else if t.edge(e.to, u).is_none_or(|b| b.channel.is_some()) {
                    loose.push((lo, hi, None, Some(e)));
                }
            }
        }
    }

    let to_doc = |id: String, (lo, hi, fwd, back): Dirs| {
        let pol = |e: Option<&Edge>| e.map(|e| policy_doc(&e.policy));
        let cap = fwd.or(back).map(|e| capacity_of(&e.policy)).unwrap_or(2);
        ChannelDoc {
            channel_id: id,
            node1: t.alias(lo).to_string(),
            node2: t.alias(hi).to_string(),
            capacity: cap,
            node1_policy: pol(fwd),
            node2_policy: pol(back),
        }
    };
    let mut channels: Vec<ChannelDoc> = by_channel
        .into_iter()
        .map(|(c, d)| to_doc(t.channel_ids()[c as usize].clone(), d))
        .collect();
    loose.sort_by_key(|d| (d.0, d.1));
    channels.extend(
        loose
            .into_iter()
            .map(|d| to_doc(format!("{}-{}", d.0, d.1), d)),
    );

    let doc = SnapshotDoc {
        nodes,
        channels,
        roles: include_roles.then(|| t.roles().to_vec()),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("snapshot serializes");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_NODES: &str = r#"{
        "nodes": [{"id": "a"}, {"id": "b"}],
        "channels": [{"channel_id": "c1", "node1": "a", "node2": "b", "capacity": 10,
            "node1_policy": {"base_fee": 1000, "proportional_fee_rate": 0.000001, "timelock": 40},
            "node2_policy": {"base_fee": 0, "proportional_fee_rate": 0.0, "timelock": 144}}]
    }"#;

    #[test]
    fn minimal_document() {
        let t = load_ln_snapshot(TWO_NODES).unwrap();
        assert_eq!(t.node_count(), 2);
        assert_eq!(t.edge_count(), 2);
        assert_eq!(t.kind(), TopologyKind::LnSnapshot);
        let e = t.edge(NodeId(0), NodeId(1)).unwrap();
        assert_eq!(e.policy.unwrap().base_fee, 1000.0);
        assert_eq!(e.policy.unwrap().capacity, 10);
        assert_eq!(t.node_by_alias("b"), Some(NodeId(1)));
    }

    #[test]
    fn normalized_round_trip_is_byte_identical() {
        let t = load_ln_snapshot(TWO_NODES).unwrap();
        let once = emit_snapshot(&t, false);
        let twice = emit_snapshot(&load_ln_snapshot(&once).unwrap(), false);
        assert_eq!(once, twice);
    }

    #[test]
    fn missing_policy_omits_direction() {
        let doc = r#"{"nodes": [{"id": "a"}, {"id": "b"}],
            "channels": [{"channel_id": "c", "node1": "a", "node2": "b", "capacity": 5,
            "node1_policy": {"base_fee": 1, "proportional_fee_rate": 0, "timelock": 1}}]}"#;
        let t = load_ln_snapshot(doc).unwrap();
        assert!(t.has_edge(NodeId(0), NodeId(1)));
        assert!(!t.has_edge(NodeId(1), NodeId(0)));
    }

    #[test]
    fn errors_name_the_record() {
        let doc = r#"{"nodes": [{"id": "a"}, {"id": "b"}],
            "channels": [{"channel_id": "c9", "node1": "a", "node2": "zz", "capacity": 5}]}"#;
        match load_ln_snapshot(doc) {
            Err(Error::Parse { record, message }) => {
                assert!(record.contains("channels[0]"), "{record}");
                assert!(record.contains("c9"));
                assert!(message.contains("zz"));
            }
            other => panic!("unexpected {other:?}"),
        }
        let doc = r#"{"nodes": [{"id": "a"}, {"id": "b"}],
            "channels": [{"channel_id": "c", "node1": "a", "node2": "b", "capacity": "big"}]}"#;
        assert!(matches!(load_ln_snapshot(doc), Err(Error::Parse { .. })));
        assert!(matches!(load_ln_snapshot("[1,2"), Err(Error::Parse { .. })));
    }

    #[test]
    fn duplicate_channel_id_rejected() {
        let doc = r#"{"nodes": [{"id": "a"}, {"id": "b"}],
            "channels": [{"channel_id": "c", "node1": "a", "node2": "b", "capacity": 5},
                         {"channel_id": "c", "node1": "b", "node2": "a", "capacity": 5}]}"#;
        assert!(matches!(load_ln_snapshot(doc), Err(Error::DuplicateRecord(_))));
    }

    #[test]
    fn parallel_channels_collapse_to_cheapest() {
        let doc = r#"{"nodes": [{"id": "a"}, {"id": "b"}],
            "channels": [
              {"channel_id": "x", "node1": "a", "node2": "b", "capacity": 5,
               "node1_policy": {"base_fee": 900, "proportional_fee_rate": 0, "timelock": 1}},
              {"channel_id": "y", "node1": "b", "node2": "a", "capacity": 7,
               "node2_policy": {"base_fee": 100, "proportional_fee_rate": 0, "timelock": 1}}]}"#;
        let (t, report) = load_ln_snapshot_with_report(doc).unwrap();
        assert_eq!(t.edge_count(), 1);
        assert_eq!(t.edge(NodeId(0), NodeId(1)).unwrap().policy.unwrap().base_fee, 100.0);
        assert_eq!(report.collapsed.len(), 1);
        assert_eq!(report.collapsed[0].kept_channel, "y");
        assert_eq!(report.collapsed[0].dropped_channel, "x");
    }

    #[test]
    fn roles_round_trip() {
        let t = load_ln_snapshot(TWO_NODES)
            .unwrap()
            .with_adversaries(&[NodeId(1)])
            .unwrap();
        let doc = emit_snapshot(&t, true);
        let back = load_ln_snapshot(&doc).unwrap();
        assert!(back.is_adversarial(NodeId(1)));
        assert!(back.is_honest(NodeId(0)));
    }

    #[test]
    fn generated_graph_exports_and_reloads() {
        let t = crate::graph::generate_weighted_random_graph(30, 4, 100.0, 1).unwrap();
        let doc = emit_snapshot(&t, false);
        let back = load_ln_snapshot(&doc).unwrap();
        assert_eq!(back.edge_count(), t.edge_count());
        for (u, e) in t.arcs() {
            let b = back.edge(u, e.to).unwrap();
            assert_eq!(b.policy.unwrap().base_fee, e.policy.unwrap().base_fee);
        }
        let line = crate::graph::generate_line_graph(6, 3).unwrap();
        let back = load_ln_snapshot(&emit_snapshot(&line, true)).unwrap();
        assert!(line.arcs().all(|(u, e)| back.has_edge(u, e.to)));
        assert_eq!(back.edge_count(), 6);
    }
}
