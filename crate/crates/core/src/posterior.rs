//! Originator posteriors over honest nodes.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::graph::{NodeId, Topology};
use crate::hop::StemObservation;
use crate::routing::LnObservation;
use crate::{Error, Result};

/// Tolerance on `sum(p) == 1` for a posterior to count as normalized.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// The adversary's record a posterior answers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(tag = "scheme", rename_all = "snake_case")]
pub enum ObservationKey {
    Stem(StemObservation),
    Ln(LnObservation),
    /// LN predecessor-only view: `(predecessor, first adversary)`.
    LnPredecessor { predecessor: NodeId, adversary: NodeId },
    /// LN view that only knows which adversary saw the payment first.
    LnAdversary { adversary: NodeId },
    /// What one LN adversary sees without pooling.
    LnSingle {
        predecessor: NodeId,
        adversary: NodeId,
        successor: NodeId,
    },
}

impl fmt::Display for ObservationKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObservationKey::Stem(o) => write!(f, "{o}"),
            ObservationKey::Ln(o) => write!(f, "{o}"),
            ObservationKey::LnPredecessor {
                predecessor,
                adversary,
            } => write!(f, "p={predecessor};first={adversary}"),
            ObservationKey::LnAdversary { adversary } => write!(f, "first={adversary}"),
            ObservationKey::LnSingle {
                predecessor,
                adversary,
                successor,
            } => write!(f, "p={predecessor};a={adversary};s={successor}"),
        }
    }
}

/// Prior probability that each honest node originated a transaction.
#[derive(Clone, Debug, Default, PartialEq)]
pub enum Prior {
    #[default]
    Uniform,
    /// Relative weights indexed by node id; only honest entries matter.
    Weights(Vec<f64>),
}

impl Prior {
    /// Weights from a sparse table, with `default_weight` for unlisted nodes.
    pub fn from_table(n: usize, table: &BTreeMap<NodeId, f64>, default_weight: f64) -> Result<Self> {
        let mut w = vec![default_weight; n];
        for (&node, &weight) in table {
            if node.index() >= n {
                return Err(Error::invalid(format!("prior names node {node} outside 0..{n}")));
            }
            w[node.index()] = weight;
        }
        if w.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::invalid("prior weights must be finite and non-negative"));
        }
        Ok(Prior::Weights(w))
    }

    fn weight(&self, n: NodeId) -> f64 {
        match self {
            Prior::Uniform => 1.0,
            Prior::Weights(w) => w.get(n.index()).copied().unwrap_or(0.0),
        }
    }

    /// `P(B_i)` for honest `i`, normalized over the honest nodes of `t`.
    pub fn probabilities(&self, t: &Topology) -> Result<Vec<(NodeId, f64)>> {
        let z: f64 = t.honest_nodes().map(|n| self.weight(n)).sum();
        if !(z > 0.0) {
            return Err(Error::invalid("prior puts no mass on honest nodes"));
        }
        Ok(t.honest_nodes().map(|n| (n, self.weight(n) / z)).collect())
    }
}

/// Probability distribution over honest nodes. Nodes absent from the support have probability 0.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Posterior {
    observation: ObservationKey,
    /// Ascending by node, strictly positive.
    probabilities: Vec<(NodeId, f64)>,
}

impl Posterior {
    /// Normalize non-negative likelihoods. With a uniform prior this is
    /// `P(B_i|A) = P(A|B_i) / sum_k P(A|B_k)`; otherwise each likelihood is first weighted by
    /// the prior.
    pub fn from_likelihoods(
        observation: ObservationKey,
        likelihoods: impl IntoIterator<Item = (NodeId, f64)>,
        prior: &Prior,
    ) -> Result<Posterior> {
        let mut weighted: Vec<(NodeId, f64)> = likelihoods
            .into_iter()
            .map(|(n, l)| (n, l * prior.weight(n)))
            .filter(|&(_, w)| w > 0.0)
            .collect();
        weighted.sort_by_key(|&(n, _)| n);
        let total: f64 = weighted.iter().map(|&(_, w)| w).sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::ImpossibleObservation(format!(
                "{observation}: no honest node can produce it"
            )));
        }
        for (_, w) in weighted.iter_mut() {
            *w /= total;
        }
        Ok(Posterior {
            observation,
            probabilities: weighted,
        })
    }

    /// Bayes' rule written out in full: `P(B_i|A) = P(B_i) P(A|B_i) / P(A)` with
    /// `P(A) = sum_k P(B_k) P(A|B_k)` over the honest nodes of `t`.
    pub fn from_bayes_rule(
        observation: ObservationKey,
        likelihoods: &[(NodeId, f64)],
        prior: &Prior,
        t: &Topology,
    ) -> Result<Posterior> {
        let priors = prior.probabilities(t)?;
        let lookup: BTreeMap<NodeId, f64> = likelihoods.iter().copied().collect();
        let joint: Vec<(NodeId, f64)> = priors
            .iter()
            .map(|&(n, pb)| (n, pb * lookup.get(&n).copied().unwrap_or(0.0)))
            .collect();
        let evidence: f64 = joint.iter().map(|&(_, j)| j).sum();
        if !(evidence > 0.0) {
            return Err(Error::ImpossibleObservation(format!(
                "{observation}: zero evidence"
            )));
        }
        let probabilities = joint
            .into_iter()
            .filter(|&(_, j)| j > 0.0)
            .map(|(n, j)| (n, j / evidence))
            .collect();
        Ok(Posterior {
            observation,
            probabilities,
        })
    }

    pub fn observation(&self) -> ObservationKey {
        self.observation
    }

    pub fn probability(&self, n: NodeId) -> f64 {
        self.probabilities
            .binary_search_by_key(&n, |&(m, _)| m)
            .map(|i| self.probabilities[i].1)
            .unwrap_or(0.0)
    }

    /// `(node, probability)` pairs with non-zero probability, ascending by node.
    pub fn support(&self) -> &[(NodeId, f64)] {
        &self.probabilities
    }

    pub fn support_size(&self) -> usize {
        self.probabilities.len()
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.probabilities.iter().map(|&(_, p)| p)
    }

    /// Most likely originator; ties go to the smaller id.
    pub fn argmax(&self) -> Option<NodeId> {
        self.probabilities
            .iter()
            .fold(None, |best: Option<(NodeId, f64)>, &(n, p)| match best {
                Some((_, bp)) if bp >= p => best,
                _ => Some((n, p)),
            })
            .map(|(n, _)| n)
    }
}
