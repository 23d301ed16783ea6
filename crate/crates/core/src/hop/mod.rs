//! Stem-phase propagation in Dandelion and Dandelion++ and the adversary's originator
//! posterior for intercepted transactions.

mod dandelion;
mod dpp;
mod experiment;
mod simulate;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::graph::{NodeId, Topology};
use crate::{Error, Result};

pub use dandelion::{dandelion_likelihoods, dandelion_posterior, partition_of};
pub use dpp::{dpp_forward_probability, dpp_likelihoods, dpp_posterior, enumerate_stem_paths};
pub use experiment::{run_hop_by_hop_experiment, HopExperiment, StemScheme};
pub use simulate::{simulate_stem_phase, walk_stem};

/// Adversary `adversary` received the transaction from `predecessor`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StemObservation {
    pub adversary: NodeId,
    pub predecessor: NodeId,
}

impl fmt::Display for StemObservation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "j={};p={}", self.adversary, self.predecessor)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StemOutcome {
    /// The first adversarial recipient and how many hops the stem took to reach it.
    Intercepted {
        observation: StemObservation,
        hops: usize,
    },
    /// The stem ended at an honest node that broadcast the transaction.
    Diffused { diffuser: NodeId, hops: usize },
}

impl StemOutcome {
    pub fn hops(&self) -> usize {
        match *self {
            StemOutcome::Intercepted { hops, .. } | StemOutcome::Diffused { hops, .. } => hops,
        }
    }

    pub fn observation(&self) -> Option<StemObservation> {
        match *self {
            StemOutcome::Intercepted { observation, .. } => Some(observation),
            StemOutcome::Diffused { .. } => None,
        }
    }
}

/// Limits on the stem paths summed when computing Dandelion++ likelihoods.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathEnumerationBounds {
    /// Longest path counted, in hops, including the final hop into the adversary.
    pub max_hops: usize,
    /// Partial paths whose weight falls below this are dropped.
    pub min_contribution: f64,
}

impl Default for PathEnumerationBounds {
    fn default() -> Self {
        PathEnumerationBounds {
            max_hops: 12,
            min_contribution: 1e-12,
        }
    }
}

impl PathEnumerationBounds {
    pub fn new(max_hops: usize, min_contribution: f64) -> Result<Self> {
        if max_hops == 0 {
            return Err(Error::invalid("max_hops must be >= 1"));
        }
        if !(0.0..1.0).contains(&min_contribution) {
            return Err(Error::invalid(format!(
                "min_contribution must be in [0, 1), got {min_contribution}"
            )));
        }
        Ok(PathEnumerationBounds {
            max_hops,
            min_contribution,
        })
    }

    /// No pruning at all; exact for graphs with fewer than `max_hops + 1` nodes.
    pub fn exhaustive(max_hops: usize) -> Self {
        PathEnumerationBounds {
            max_hops,
            min_contribution: 0.0,
        }
    }

    /// 12 hops when every node has at most two successors, 5 for denser subgraphs.
    pub fn for_topology(t: &Topology) -> Self {
        let widest = t.nodes().map(|v| t.out_degree(v)).max().unwrap_or(0);
        PathEnumerationBounds {
            max_hops: if widest <= 2 { 12 } else { 5 },
            ..Self::default()
        }
    }
}

fn check_p_f(p_f: f64) -> Result<()> {
    if !(0.0..1.0).contains(&p_f) {
        return Err(Error::invalid(format!("p_f must be in [0, 1), got {p_f}")));
    }
    Ok(())
}

/// Common sanity checks: `obs.adversary` is adversarial, its predecessor is honest and linked
/// to it.
fn check_observation(t: &Topology, obs: &StemObservation) -> Result<()> {
    let n = t.node_count();
    if obs.adversary.index() >= n || obs.predecessor.index() >= n {
        return Err(Error::invalid(format!("{obs}: node out of range 0..{n}")));
    }
    if !t.is_adversarial(obs.adversary) {
        return Err(Error::invalid(format!("{obs}: node {} is honest", obs.adversary)));
    }
    if t.is_adversarial(obs.predecessor) || !t.has_edge(obs.predecessor, obs.adversary) {
        return Err(Error::ImpossibleObservation(format!(
            "{obs}: no honest arc {} -> {}",
            obs.predecessor, obs.adversary
        )));
    }
    Ok(())
}
