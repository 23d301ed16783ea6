use super::{Edge, NodeId, Topology};
use crate::{Error, Result};

/// Drop every arc whose directional balance (half the channel capacity) is below `amount`.
/// Arcs without a policy have unbounded capacity and are kept.
pub fn filter_by_amount(t: &Topology, amount: f64) -> Result<Topology> {
    if !(amount >= 0.0) {
        return Err(Error::invalid(format!("amount must be >= 0, got {amount}")));
    }
    let arcs: Vec<(NodeId, Edge)> = t
        .arcs()
        .filter(|(_, e)| e.policy.is_none_or(|p| p.directional_balance() >= amount))
        .map(|(u, e)| (u, e.clone()))
        .collect();
    Topology::from_parts(
        t.kind(),
        t.roles().to_vec(),
        t.aliases().to_vec(),
        t.channel_ids().to_vec(),
        arcs,
    )
}

struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
    }
}

/// Induced subgraph on the largest weakly connected component, nodes renumbered densely in their
/// original order. Ties go to the component holding the smallest node id.
pub fn largest_connected_component(t: &Topology) -> Result<Topology> {
    let n = t.node_count();
    if n == 0 {
        return Err(Error::EmptyTopology);
    }
    let mut uf = UnionFind::new(n);
    for (u, e) in t.arcs() {
        uf.union(u.index(), e.to.index());
    }
    let mut comp_size = vec![0usize; n];
    let mut first_member = vec![usize::MAX; n];
    for v in 0..n {
        let r = uf.find(v);
        comp_size[r] += 1;
        first_member[r] = first_member[r].min(v);
    }
    let best_root = (0..n)
        .filter(|&r| comp_size[r] > 0)
        .max_by(|&a, &b| {
            comp_size[a]
                .cmp(&comp_size[b])
                .then(first_member[b].cmp(&first_member[a]))
        })
        .expect("non-empty");

    let mut new_id = vec![None; n];
    let mut kept = Vec::new();
    for (v, id) in new_id.iter_mut().enumerate() {
        if uf.find(v) == best_root {
            *id = Some(NodeId::from_index(kept.len()));
            kept.push(v);
        }
    }
    let roles = kept.iter().map(|&v| t.roles()[v]).collect();
    let aliases = kept.iter().map(|&v| t.aliases()[v].clone()).collect();
    let arcs: Vec<(NodeId, Edge)> = t
        .arcs()
        .filter_map(|(u, e)| {
            let nu = new_id[u.index()]?;
            let nv = new_id[e.to.index()]?;
            Some((
                nu,
                Edge {
                    to: nv,
                    ..e.clone()
                },
            ))
        })
        .collect();
    Topology::from_parts(t.kind(), roles, aliases, t.channel_ids().to_vec(), arcs)
}
