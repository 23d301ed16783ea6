use std::collections::HashMap;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;

use super::{build_path_set, observations_from_route, LnIndex, LnObservation, LnQuery, RoutingParams};
use crate::graph::{
    filter_by_amount, largest_connected_component, AdversarySpec, GeneratorSpec, Topology,
};
use crate::outcome::{Outcome, TxRecord};
use crate::posterior::Prior;
use crate::rng::{derive_seed, stream};
use crate::{Error, Result};

/// Where each run's payment graph comes from.
#[derive(Clone, Debug)]
pub enum TopologySource {
    /// The same graph every run, e.g. a loaded snapshot.
    Fixed(Arc<Topology>),
    /// A fresh synthetic graph per run.
    Generated(GeneratorSpec),
}

#[derive(Clone, Debug)]
pub struct LnExperiment {
    pub topology: TopologySource,
    pub adversary: AdversarySpec,
    pub amount: f64,
    pub k: usize,
    pub rf: f64,
    /// Restrict to the largest connected component after amount filtering.
    pub lcc: bool,
    pub runs: usize,
    /// Indexed by node id after filtering and component extraction.
    pub prior: Prior,
    pub seed: u64,
}

impl LnExperiment {
    pub fn params(&self) -> RoutingParams {
        RoutingParams {
            amount: self.amount,
            rf: self.rf,
            bias: 0.0,
        }
    }

    /// Payment graph for `run` after amount filtering, component extraction and adversary
    /// placement.
    pub fn topology_for_run(&self, run: usize) -> Result<Topology> {
        let base = match &self.topology {
            TopologySource::Fixed(t) => (**t).clone(),
            TopologySource::Generated(g) => g.generate(derive_seed(self.seed, "topology", run as u64))?,
        };
        let mut t = filter_by_amount(&base, self.amount)?;
        if self.lcc {
            t = largest_connected_component(&t)?;
        }
        self.adversary.apply(
            &t,
            derive_seed(self.seed, "adversaries", run as u64),
            &self.params(),
        )
    }

    fn run_once(&self, run: usize) -> Result<Outcome> {
        let t = self.topology_for_run(run)?;
        let ps = build_path_set(&t, &self.params(), self.k)?;
        let index = LnIndex::new(&ps);
        let n = t.node_count() as u64;
        let route_seed = derive_seed(self.seed, "routes", run as u64);
        let mut cache: HashMap<LnObservation, TxRecord> = HashMap::new();
        let mut out = Outcome::default();
        for s in t.honest_nodes() {
            for pair in ps.from_source(s) {
                out.transactions += 1;
                let route = if pair.routes.len() == 1 {
                    &pair.routes[0]
                } else {
                    let mut rng = stream(route_seed, "pair", s.0 as u64 * n + pair.destination.0 as u64);
                    &pair.routes[rng.gen_range(0..pair.routes.len())]
                };
                let Some(obs) = observations_from_route(route, &t) else {
                    continue;
                };
                out.intercepted += 1;
                let rec = match cache.get(&obs) {
                    Some(r) => *r,
                    None => {
                        let p = index.posterior(&LnQuery::Full(obs), &self.prior)?;
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

/// Every honest node pays every other reachable honest node once per run, along a route drawn
/// uniformly from the pair's best-k list. Each intercepted payment is scored.
pub fn run_ln_experiment(cfg: &LnExperiment) -> Result<Outcome> {
    if cfg.runs == 0 {
        return Err(Error::invalid("runs must be >= 1"));
    }
    if cfg.k == 0 {
        return Err(Error::invalid("k must be >= 1"));
    }
    let parts: Vec<Outcome> = (0..cfg.runs)
        .into_par_iter()
        .map(|r| cfg.run_once(r).map_err(|e| e.in_run(r)))
        .collect::<Result<_>>()?;
    Ok(Outcome::merge(parts))
}
