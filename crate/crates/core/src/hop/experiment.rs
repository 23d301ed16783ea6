use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    dandelion_posterior, dpp_posterior, simulate_stem_phase, PathEnumerationBounds,
    StemObservation,
};
use crate::graph::{AdversarySpec, GeneratorSpec, Topology};
use crate::outcome::{Outcome, TxRecord};
use crate::posterior::Prior;
use crate::rng::{derive_seed, stream};
use crate::routing::RoutingParams;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StemScheme {
    Dandelion,
    DandelionPp,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HopExperiment {
    pub scheme: StemScheme,
    pub topology: GeneratorSpec,
    pub p_f: f64,
    pub adversary: AdversarySpec,
    pub runs: usize,
    pub tx_per_node: usize,
    /// `None` picks [`PathEnumerationBounds::for_topology`] per run.
    pub bounds: Option<PathEnumerationBounds>,
    pub prior: Prior,
    pub seed: u64,
}

impl HopExperiment {
    /// Topology used by run `run`, with adversaries placed.
    pub fn topology_for_run(&self, run: usize) -> Result<Topology> {
        let t = self
            .topology
            .generate(derive_seed(self.seed, "topology", run as u64))?;
        self.adversary.apply(
            &t,
            derive_seed(self.seed, "adversaries", run as u64),
            &RoutingParams::default(),
        )
    }

    fn run_once(&self, run: usize) -> Result<Outcome> {
        let t = self.topology_for_run(run)?;
        let bounds = self
            .bounds
            .unwrap_or_else(|| PathEnumerationBounds::for_topology(&t));
        let mut rng = stream(self.seed, "stem", run as u64);
        let mut cache: HashMap<StemObservation, TxRecord> = HashMap::new();
        let mut out = Outcome::default();
        for origin in t.honest_nodes() {
            for _ in 0..self.tx_per_node {
                out.transactions += 1;
                let Some(obs) = simulate_stem_phase(&t, origin, self.p_f, &mut rng).observation()
                else {
                    continue;
                };
                out.intercepted += 1;
                let rec = match cache.get(&obs) {
                    Some(r) => *r,
                    None => {
                        let p = match self.scheme {
                            StemScheme::Dandelion => {
                                dandelion_posterior(&t, self.p_f, &obs, &self.prior)?
                            }
                            StemScheme::DandelionPp => {
                                dpp_posterior(&t, self.p_f, &obs, &bounds, &self.prior)?
                            }
                        };
                        let r = TxRecord::from_posterior(run, &p)?;
                        cache.insert(obs, r);
                        r
                    }
                };
                out.records.push(rec);
            }
        }
        Ok(out)
    }
}

/// Every run rebuilds the topology and adversary placement from its own derived seed, lets each
/// honest node originate `tx_per_node` transactions and scores every intercepted one. Runs
/// execute in parallel on the current rayon pool; the result does not depend on its size.
pub fn run_hop_by_hop_experiment(cfg: &HopExperiment) -> Result<Outcome> {
    if cfg.runs == 0 {
        return Err(Error::invalid("runs must be >= 1"));
    }
    let parts: Vec<Outcome> = (0..cfg.runs)
        .into_par_iter()
        .map(|r| cfg.run_once(r).map_err(|e| e.in_run(r)))
        .collect::<Result<_>>()?;
    Ok(Outcome::merge(parts))
}
