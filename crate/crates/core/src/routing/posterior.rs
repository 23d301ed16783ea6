use std::collections::HashMap;

use super::observe::observe_with;
use super::{single_node_view, LnObservation, PathSet, Route};
use crate::graph::NodeId;
use crate::posterior::{ObservationKey, Posterior, Prior};
use crate::{Error, Result};

/// What the adversary is assumed to know about one routed payment, from coarsest to finest.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LnQuery {
    /// Only the first adversary on the route.
    Adversary(NodeId),
    /// The first adversary and its predecessor.
    Predecessor { predecessor: NodeId, adversary: NodeId },
    /// The pooled observation of all adversaries on the route.
    Full(LnObservation),
    /// One adversary acting alone: its predecessor and successor on the route.
    Single {
        predecessor: NodeId,
        adversary: NodeId,
        successor: NodeId,
    },
}

impl LnQuery {
    pub fn key(&self) -> ObservationKey {
        match *self {
            LnQuery::Adversary(adversary) => ObservationKey::LnAdversary { adversary },
            LnQuery::Predecessor {
                predecessor,
                adversary,
            } => ObservationKey::LnPredecessor {
                predecessor,
                adversary,
            },
            LnQuery::Full(o) => ObservationKey::Ln(o),
            LnQuery::Single {
                predecessor,
                adversary,
                successor,
            } => ObservationKey::LnSingle {
                predecessor,
                adversary,
                successor,
            },
        }
    }

    /// Whether `route` would produce this observation.
    pub fn matches(&self, route: &Route, adversarial: impl Fn(NodeId) -> bool) -> bool {
        match *self {
            LnQuery::Single {
                predecessor,
                adversary,
                successor,
            } => single_node_view(route, adversary) == Some((predecessor, adversary, successor)),
            _ => match observe_with(&route.nodes, adversarial) {
                None => false,
                Some(o) => match *self {
                    LnQuery::Adversary(a) => o.first_adversary == a,
                    LnQuery::Predecessor {
                        predecessor,
                        adversary,
                    } => o.first_adversary == adversary && o.predecessor == predecessor,
                    LnQuery::Full(full) => o == full,
                    LnQuery::Single { .. } => unreachable!(),
                },
            },
        }
    }
}

/// Posterior over originators for `query`: each honest source `i` gets likelihood
/// `SP_i(query) / SP_i`, the share of its routes in `ps` that produce the observation.
pub fn ln_posterior(ps: &PathSet, query: LnQuery, prior: &Prior) -> Result<Posterior> {
    let n = ps.node_count();
    let likelihoods = (0..n).filter_map(|i| {
        let src = NodeId::from_index(i);
        let total = ps.routes_from(src);
        if total == 0 {
            return None;
        }
        let hits = ps
            .from_source(src)
            .iter()
            .flat_map(|p| p.routes.iter())
            .filter(|r| query.matches(r, |v| ps.is_adversarial(v)))
            .count();
        Some((src, hits as f64 / total as f64))
    });
    Posterior::from_likelihoods(query.key(), likelihoods, prior).map_err(|e| match e {
        Error::ImpossibleObservation(_) => {
            Error::ImpossibleObservation(format!("{}: no route produces it", query.key()))
        }
        other => other,
    })
}

/// Per-source counts of each observation over a whole [`PathSet`], so that many posteriors can
/// be read without rescanning routes.
#[derive(Clone, Debug)]
pub struct LnIndex {
    routes_from: Vec<u32>,
    full: HashMap<LnObservation, Vec<(NodeId, u32)>>,
    predecessor: HashMap<(NodeId, NodeId), Vec<(NodeId, u32)>>,
    adversary: HashMap<NodeId, Vec<(NodeId, u32)>>,
}

fn bump<K: std::hash::Hash + Eq>(m: &mut HashMap<K, Vec<(NodeId, u32)>>, k: K, src: NodeId) {
    let v = m.entry(k).or_default();
    match v.last_mut() {
        Some((s, c)) if *s == src => *c += 1,
        _ => v.push((src, 1)),
    }
}

impl LnIndex {
    pub fn new(ps: &PathSet) -> LnIndex {
        let n = ps.node_count();
        let mut idx = LnIndex {
            routes_from: vec![0; n],
            full: HashMap::new(),
            predecessor: HashMap::new(),
            adversary: HashMap::new(),
        };
        for i in 0..n {
            let src = NodeId::from_index(i);
            for pair in ps.from_source(src) {
                for r in &pair.routes {
                    idx.routes_from[i] += 1;
                    if let Some(o) = observe_with(&r.nodes, |v| ps.is_adversarial(v)) {
                        bump(&mut idx.full, o, src);
                        bump(&mut idx.predecessor, (o.predecessor, o.first_adversary), src);
                        bump(&mut idx.adversary, o.first_adversary, src);
                    }
                }
            }
        }
        idx
    }

    /// `SP_i`: routes originating at `i`.
    pub fn routes_from(&self, i: NodeId) -> u32 {
        self.routes_from[i.index()]
    }

    /// `(i, SP_i(query))` for every source with a matching route. `Single` queries are not
    /// indexed; use [`ln_posterior`] for those.
    pub fn counts(&self, query: &LnQuery) -> Option<&[(NodeId, u32)]> {
        match query {
            LnQuery::Adversary(a) => self.adversary.get(a),
            LnQuery::Predecessor {
                predecessor,
                adversary,
            } => self.predecessor.get(&(*predecessor, *adversary)),
            LnQuery::Full(o) => self.full.get(o),
            LnQuery::Single { .. } => None,
        }
        .map(Vec::as_slice)
    }

    pub fn posterior(&self, query: &LnQuery, prior: &Prior) -> Result<Posterior> {
        if matches!(query, LnQuery::Single { .. }) {
            return Err(Error::invalid("single-adversary queries are not indexed"));
        }
        let counts = self.counts(query).ok_or_else(|| {
            Error::ImpossibleObservation(format!("{}: no route produces it", query.key()))
        })?;
        let likelihoods = counts
            .iter()
            .map(|&(i, c)| (i, c as f64 / self.routes_from(i) as f64));
        Posterior::from_likelihoods(query.key(), likelihoods, prior)
    }
}
