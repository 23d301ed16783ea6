//! Recovering the Dandelion++ privacy subgraph from diffusion statistics.
//!
//! The adversary injects transactions through one honest node at a time and watches which
//! node broadcasts each one. The node's two privacy-subgraph successors diffuse far more often
//! than its other base-graph neighbours, so the two most frequent diffusers are taken as its
//! successors.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::graph::{
    assign_adversaries, derive_privacy_subgraph, generate_k_regular, AdversaryStrategy, NodeId,
    Topology,
};
use crate::hop::{walk_stem, StemOutcome};
use crate::rng::{derive_seed, stream, StreamRng};
use crate::{Error, Result};

/// How often each base-graph out-neighbour of `target` diffused a transaction injected there.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DiffusionCounts {
    pub target: NodeId,
    /// One entry per candidate, ascending by node.
    pub counts: Vec<(NodeId, u64)>,
    /// Diffusions by nodes that are not candidates, ascending by node.
    pub others: Vec<(NodeId, u64)>,
}

impl DiffusionCounts {
    pub fn total(&self) -> u64 {
        self.counts.iter().chain(&self.others).map(|&(_, c)| c).sum()
    }

    fn count_of(&self, v: NodeId) -> u64 {
        self.counts
            .iter()
            .chain(&self.others)
            .find(|&&(u, _)| u == v)
            .map_or(0, |&(_, c)| c)
    }
}

/// Inject `tx_count` stems at `target` over `psg` and tally the diffusing node of each.
/// Candidates are the target's base-graph out-neighbours. Adversarial nodes relay like honest
/// ones.
pub fn simulate_diffusion_counts(
    bg: &Topology,
    psg: &Topology,
    target: NodeId,
    tx_count: usize,
    p_f: f64,
    rng: &mut StreamRng,
) -> Result<DiffusionCounts> {
    if !(0.0..1.0).contains(&p_f) {
        return Err(Error::invalid(format!("p_f must be in [0, 1), got {p_f}")));
    }
    if bg.node_count() != psg.node_count() {
        return Err(Error::invalid("base graph and privacy subgraph differ in size"));
    }
    let mut tally: BTreeMap<NodeId, u64> = bg.successor_ids(target).map(|v| (v, 0)).collect();
    let candidates: Vec<NodeId> = tally.keys().copied().collect();
    for _ in 0..tx_count {
        if let StemOutcome::Diffused { diffuser, .. } = walk_stem(psg, target, p_f, rng, false) {
            *tally.entry(diffuser).or_default() += 1;
        }
    }
    let (counts, others) = tally
        .into_iter()
        .partition(|(v, _)| candidates.binary_search(v).is_ok());
    Ok(DiffusionCounts {
        target,
        counts,
        others,
    })
}

/// The two inferred successors of one target.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SuccessorGuess {
    pub successors: (NodeId, NodeId),
    /// The second pick tied on count with an unpicked candidate.
    pub tie: bool,
    /// Count of the second pick minus the best unpicked count.
    pub confidence: u64,
}

/// Candidates ordered by count, highest first, ties toward the smaller id.
fn ranked(counts: &[(NodeId, u64)]) -> Vec<(NodeId, u64)> {
    let mut r = counts.to_vec();
    r.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    r
}

/// The two most frequent diffusers among the candidates; ties go to the smaller id.
pub fn infer_successors(dc: &DiffusionCounts) -> Result<SuccessorGuess> {
    if dc.counts.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "node {} has {} candidate successors",
            dc.target,
            dc.counts.len()
        )));
    }
    if dc.counts.iter().all(|&(_, c)| c == 0) {
        return Err(Error::InsufficientData(format!(
            "no candidate of node {} diffused anything",
            dc.target
        )));
    }
    let r = ranked(&dc.counts);
    let third = r.get(2).map_or(0, |x| x.1);
    Ok(SuccessorGuess {
        successors: (r[0].0, r[1].0),
        tie: r.len() > 2 && r[1].1 == third,
        confidence: r[1].1 - third,
    })
}

/// Optional refinements applied on top of the frequency ranking.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LearningOptions {
    /// Break count ties using diffusions observed at each candidate's own out-neighbours: a true
    /// successor relays transactions onward, so its neighbourhood diffuses more.
    pub second_hop: bool,
    /// After a first pass, resolve remaining ties toward candidates that have fewer inferred
    /// predecessors so far.
    pub edge_elimination: bool,
}

/// Per-target outcome.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TargetResult {
    pub target: NodeId,
    /// Both successors, ascending. Known (adversarial) successors are included.
    pub successors: [NodeId; 2],
    pub known: usize,
    pub tie: bool,
    pub confidence: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LearnedSubgraph {
    /// Inferred arcs, ascending.
    pub edges: Vec<(NodeId, NodeId)>,
    /// Share of all privacy-subgraph arcs recovered, adversaries' own arcs included.
    pub accuracy: f64,
    /// Share of honest nodes' arcs recovered.
    pub honest_accuracy: f64,
    pub targets: Vec<TargetResult>,
}

struct Pending {
    target: NodeId,
    known: Vec<NodeId>,
    dc: DiffusionCounts,
}

fn second_hop_score(bg: &Topology, dc: &DiffusionCounts, candidate: NodeId) -> u64 {
    bg.successor_ids(candidate)
        .filter(|&x| x != dc.target)
        .map(|x| dc.count_of(x))
        .sum()
}

/// Choose `need` successors from the honest candidates. Returns the picks plus tie flag and
/// confidence gap.
fn choose(
    bg: &Topology,
    p: &Pending,
    need: usize,
    opts: &LearningOptions,
    indegree: Option<&[u32]>,
) -> (Vec<NodeId>, bool, u64) {
    let mut r: Vec<(NodeId, u64, u64, u32)> = p
        .dc
        .counts
        .iter()
        .filter(|(v, _)| !p.known.contains(v))
        .map(|&(v, c)| {
            let hop2 = if opts.second_hop { second_hop_score(bg, &p.dc, v) } else { 0 };
            let indeg = indegree.map_or(0, |d| d[v.index()]);
            (v, c, hop2, indeg)
        })
        .collect();
    r.sort_by(|a, b| {
        b.1.cmp(&a.1)
            .then(b.2.cmp(&a.2))
            .then(a.3.cmp(&b.3))
            .then(a.0.cmp(&b.0))
    });
    let need = need.min(r.len());
    if need == 0 {
        return (Vec::new(), false, 0);
    }
    let last = r[need - 1];
    let next = r.get(need);
    let tie = next.is_some_and(|n| n.1 == last.1);
    let gap = last.1 - next.map_or(0, |n| n.1);
    (r[..need].iter().map(|x| x.0).collect(), tie, gap)
}

/// Run the attack against `psg`, whose roles mark the adversaries. Every honest node receives
/// `tx_per_node` injected transactions; each adversary's own arcs and the arcs from honest
/// nodes into adversaries are known without inference.
pub fn learn_with_roles(
    bg: &Topology,
    psg: &Topology,
    tx_per_node: usize,
    p_f: f64,
    seed: u64,
    opts: &LearningOptions,
) -> Result<LearnedSubgraph> {
    for (u, e) in psg.arcs() {
        if !bg.has_edge(u, e.to) {
            return Err(Error::invalid(format!(
                "privacy arc {u}->{} is not a base-graph arc",
                e.to
            )));
        }
    }
    let honest: Vec<NodeId> = psg.honest_nodes().collect();
    let pending: Vec<Pending> = honest
        .par_iter()
        .map(|&u| {
            let mut rng = stream(seed, "inject", u.0 as u64);
            let dc = simulate_diffusion_counts(bg, psg, u, tx_per_node, p_f, &mut rng)?;
            let known = psg
                .successor_ids(u)
                .filter(|&v| psg.is_adversarial(v))
                .collect();
            Ok(Pending { target: u, known, dc })
        })
        .collect::<Result<_>>()?;

    let mut results: Vec<TargetResult> = pending
        .iter()
        .map(|p| {
            let need = psg.out_degree(p.target) - p.known.len();
            let (picks, tie, confidence) = choose(bg, p, need, opts, None);
            result(p, picks, tie, confidence)
        })
        .collect();

    if opts.edge_elimination {
        let mut indegree = vec![0u32; psg.node_count()];
        for r in results.iter().filter(|r| !r.tie) {
            for s in r.successors {
                indegree[s.index()] += 1;
            }
        }
        for (p, r) in pending.iter().zip(results.iter_mut()) {
            if r.tie {
                let need = psg.out_degree(p.target) - p.known.len();
                let (picks, tie, confidence) = choose(bg, p, need, opts, Some(&indegree));
                *r = result(p, picks, tie, confidence);
            }
        }
    }

    let mut edges: Vec<(NodeId, NodeId)> = results
        .iter()
        .flat_map(|r| r.successors.iter().map(move |&s| (r.target, s)))
        .collect();
    for a in psg.adversaries() {
        edges.extend(psg.successor_ids(a).map(|s| (a, s)));
    }
    edges.sort();
    edges.dedup();

    let truth: Vec<(NodeId, NodeId)> = psg.arcs().map(|(u, e)| (u, e.to)).collect();
    let hit = |pairs: &mut dyn Iterator<Item = &(NodeId, NodeId)>| -> (usize, usize) {
        pairs.fold((0, 0), |(h, n), e| {
            (h + usize::from(edges.binary_search(e).is_ok()), n + 1)
        })
    };
    let (h_all, n_all) = hit(&mut truth.iter());
    let (h_hon, n_hon) = hit(&mut truth.iter().filter(|(u, _)| psg.is_honest(*u)));
    Ok(LearnedSubgraph {
        edges,
        accuracy: h_all as f64 / n_all.max(1) as f64,
        honest_accuracy: h_hon as f64 / n_hon.max(1) as f64,
        targets: results,
    })
}

fn result(p: &Pending, picks: Vec<NodeId>, tie: bool, confidence: u64) -> TargetResult {
    let mut all: Vec<NodeId> = p.known.iter().copied().chain(picks).collect();
    all.sort();
    // a target with fewer than two honest candidates keeps what it has
    while all.len() < 2 {
        all.push(all.first().copied().unwrap_or(p.target));
    }
    TargetResult {
        target: p.target,
        successors: [all[0], all[1]],
        known: p.known.len(),
        tie,
        confidence,
    }
}

/// Place `round(adversary_fraction * N)` random adversaries on `psg`, then run
/// [`learn_with_roles`].
pub fn learn_privacy_subgraph(
    bg: &Topology,
    psg: &Topology,
    adversary_fraction: f64,
    tx_per_node: usize,
    p_f: f64,
    seed: u64,
    opts: &LearningOptions,
) -> Result<LearnedSubgraph> {
    if !(adversary_fraction > 0.0 && adversary_fraction < 1.0) {
        return Err(Error::invalid(format!(
            "adversary fraction must be in (0, 1), got {adversary_fraction}"
        )));
    }
    let count = ((adversary_fraction * psg.node_count() as f64).round() as usize).max(1);
    let psg = assign_adversaries(
        psg,
        AdversaryStrategy::Random,
        count,
        derive_seed(seed, "adversaries", 0),
    )?;
    learn_with_roles(bg, &psg, tx_per_node, p_f, seed, opts)
}

/// Parameters for a self-contained learning experiment on a synthetic base graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearningExperiment {
    pub n: usize,
    /// Base-graph out-degree; 8 models the bitcoin graph.
    pub base_out: usize,
    pub adversary_fraction: f64,
    pub tx_per_node: usize,
    pub p_f: f64,
    pub seed: u64,
    pub options: LearningOptions,
}

impl LearningExperiment {
    pub fn graphs(&self) -> Result<(Topology, Topology)> {
        let bg = generate_k_regular(self.n, self.base_out, derive_seed(self.seed, "base", 0))?;
        let psg = derive_privacy_subgraph(&bg, 2, derive_seed(self.seed, "privacy", 0))?;
        Ok((bg, psg))
    }

    pub fn run(&self) -> Result<LearnedSubgraph> {
        let (bg, psg) = self.graphs()?;
        learn_privacy_subgraph(
            &bg,
            &psg,
            self.adversary_fraction,
            self.tx_per_node,
            self.p_f,
            self.seed,
            &self.options,
        )
    }
}
