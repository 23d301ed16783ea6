use rand::seq::SliceRandom;
use rand::Rng;

use super::{StemObservation, StemOutcome};
use crate::graph::{NodeId, Topology};
use crate::rng::StreamRng;

/// One stem from `originator`: the originator always forwards, every later honest recipient
/// forwards with probability `p_f` and otherwise diffuses. The first adversarial recipient
/// intercepts. A node that receives the transaction a second time already holds it, so the
/// stem ends there and that node diffuses.
pub fn simulate_stem_phase(
    t: &Topology,
    originator: NodeId,
    p_f: f64,
    rng: &mut StreamRng,
) -> StemOutcome {
    walk_stem(t, originator, p_f, rng, true)
}

/// As [`simulate_stem_phase`]; with `stop_at_adversary = false` adversaries relay like honest
/// nodes and the walk always ends in a diffusion.
pub fn walk_stem(
    t: &Topology,
    originator: NodeId,
    p_f: f64,
    rng: &mut StreamRng,
    stop_at_adversary: bool,
) -> StemOutcome {
    let mut seen = vec![originator];
    let mut cur = originator;
    let mut hops = 0;
    loop {
        let Some(next) = t.successors(cur).choose(rng).map(|e| e.to) else {
            return StemOutcome::Diffused { diffuser: cur, hops };
        };
        hops += 1;
        if stop_at_adversary && t.is_adversarial(next) {
            return StemOutcome::Intercepted {
                observation: StemObservation {
                    adversary: next,
                    predecessor: cur,
                },
                hops,
            };
        }
        if seen.contains(&next) || !rng.gen_bool(p_f) {
            return StemOutcome::Diffused {
                diffuser: next,
                hops,
            };
        }
        seen.push(next);
        cur = next;
    }
}
