use super::{check_observation, check_p_f, StemObservation};
use crate::graph::{NodeId, Topology, TopologyKind};
use crate::posterior::{ObservationKey, Posterior, Prior};
use crate::{Error, Result};

/// Honest nodes between `j` and the previous adversary on the circuit, nearest to `j` first.
/// Only these can originate a transaction that `j` sees first.
pub fn partition_of(t: &Topology, j: NodeId) -> Result<Vec<NodeId>> {
    if t.kind() != TopologyKind::Line {
        return Err(Error::invalid("partitions are defined on line topologies only"));
    }
    if j.index() >= t.node_count() || !t.is_adversarial(j) {
        return Err(Error::invalid(format!("node {j} is not adversarial")));
    }
    let mut out = Vec::new();
    let mut v = t.predecessors(j)[0];
    while t.is_honest(v) {
        out.push(v);
        v = t.predecessors(v)[0];
    }
    Ok(out)
}

/// `p_f^(h-1)` for the partition member `h` hops upstream of the adversary.
pub fn dandelion_likelihoods(
    t: &Topology,
    p_f: f64,
    obs: &StemObservation,
) -> Result<Vec<(NodeId, f64)>> {
    check_p_f(p_f)?;
    let partition = partition_of(t, obs.adversary)?;
    if partition.is_empty() {
        return Err(Error::ImpossibleObservation(format!(
            "{obs}: the node upstream of {} is adversarial",
            obs.adversary
        )));
    }
    check_observation(t, obs)?;
    let mut w = 1.0;
    Ok(partition
        .into_iter()
        .map(|v| {
            let l = (v, w);
            w *= p_f;
            l
        })
        .collect())
}

pub fn dandelion_posterior(
    t: &Topology,
    p_f: f64,
    obs: &StemObservation,
    prior: &Prior,
) -> Result<Posterior> {
    let lik = dandelion_likelihoods(t, p_f, obs)?;
    Posterior::from_likelihoods(ObservationKey::Stem(*obs), lik, prior)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Edge;
    use crate::metrics::shannon_entropy;

    fn cycle(order: &[u32], adversaries: &[u32]) -> Topology {
        let n = order.len();
        let arcs = (0..n).map(|i| {
            (
                NodeId(order[i]),
                Edge { to: NodeId(order[(i + 1) % n]), policy: None, channel: None },
            )
        });
        let adv: Vec<NodeId> = adversaries.iter().map(|&a| NodeId(a)).collect();
        Topology::from_arcs(TopologyKind::Line, n, arcs)
            .unwrap()
            .with_adversaries(&adv)
            .unwrap()
    }

    fn ids(v: &[NodeId]) -> Vec<u32> {
        v.iter().map(|n| n.0).collect()
    }

    #[test]
    fn partitions_walk_back_to_previous_adversary() {
        let t = cycle(&[0, 1, 2, 3, 4, 5, 6], &[3, 6]);
        assert_eq!(ids(&partition_of(&t, NodeId(3)).unwrap()), vec![2, 1, 0]);
        assert_eq!(ids(&partition_of(&t, NodeId(6)).unwrap()), vec![5, 4]);
        assert!(partition_of(&t, NodeId(2)).is_err());
        let single = cycle(&[0, 1, 2, 3, 4, 5, 6], &[4]);
        assert_eq!(partition_of(&single, NodeId(4)).unwrap().len(), 6);
    }

    #[test]
    fn five_cycle_posterior() {
        let t = cycle(&[0, 1, 2, 3, 4], &[3]);
        let obs = StemObservation { adversary: NodeId(3), predecessor: NodeId(2) };
        let p = dandelion_posterior(&t, 0.5, &obs, &Prior::Uniform).unwrap();
        for (v, want) in [(2, 8.0 / 15.0), (1, 4.0 / 15.0), (0, 2.0 / 15.0), (4, 1.0 / 15.0)] {
            assert!((p.probability(NodeId(v)) - want).abs() < 1e-15);
        }
        assert!((shannon_entropy(&p).unwrap() - 1.640_223_928_941_852).abs() < 1e-9);
        assert_eq!(p.argmax(), Some(NodeId(2)));
    }

    #[test]
    fn adjacent_adversaries_make_the_later_unobservable() {
        let t = cycle(&[0, 1, 2, 3, 4], &[2, 3]);
        let obs = StemObservation { adversary: NodeId(3), predecessor: NodeId(2) };
        assert!(matches!(
            dandelion_posterior(&t, 0.9, &obs, &Prior::Uniform),
            Err(Error::ImpossibleObservation(_))
        ));
    }

    #[test]
    fn wrong_predecessor_rejected() {
        let t = cycle(&[0, 1, 2, 3, 4], &[3]);
        let obs = StemObservation { adversary: NodeId(3), predecessor: NodeId(0) };
        assert!(dandelion_posterior(&t, 0.9, &obs, &Prior::Uniform).is_err());
    }
}
