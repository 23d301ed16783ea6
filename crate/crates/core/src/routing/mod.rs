//! Source routing over payment-channel graphs: the fee-based cost function, best and best-k
//! routes, the adversary's view of a routed payment, and originator posteriors.

mod experiment;
mod observe;
mod paths;
mod pathset;
mod posterior;

use serde::{Deserialize, Serialize};

use crate::graph::ChannelPolicy;

pub use experiment::{run_ln_experiment, LnExperiment, TopologySource};
pub use observe::{observations_from_route, single_node_view, LnObservation};
pub use paths::{best_k_paths, best_path, best_route_tree, route_cost, Route};
pub use pathset::{build_path_set, PathSet};
pub use posterior::{ln_posterior, LnIndex, LnQuery};

/// Default risk factor applied to `amount * timelock`.
pub const DEFAULT_RF: f64 = 1.5e-9;

/// Inputs to the per-arc routing cost other than the channel policy.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoutingParams {
    pub amount: f64,
    pub rf: f64,
    pub bias: f64,
}

impl Default for RoutingParams {
    fn default() -> Self {
        RoutingParams {
            amount: 1.0,
            rf: DEFAULT_RF,
            bias: 0.0,
        }
    }
}

impl RoutingParams {
    pub fn with_amount(amount: f64) -> Self {
        RoutingParams {
            amount,
            ..Self::default()
        }
    }
}

/// `amount * proportional_fee_rate + base_fee + amount * timelock * rf + bias`
pub fn edge_cost(amount: f64, policy: &ChannelPolicy, rf: f64, bias: f64) -> f64 {
    amount * policy.proportional_fee_rate
        + policy.base_fee
        + amount * policy.timelock as f64 * rf
        + bias
}

#[cfg(test)]
mod tests {
    use super::*;

    fn policy(rate: f64, base: f64, timelock: u32) -> ChannelPolicy {
        ChannelPolicy {
            proportional_fee_rate: rate,
            base_fee: base,
            timelock,
            capacity: 1,
        }
    }

    #[test]
    fn zero_amount_leaves_base_fee() {
        assert_eq!(edge_cost(0.0, &policy(0.3, 1000.0, 40), 1e-3, 0.0), 1000.0);
    }

    #[test]
    fn four_term_sum() {
        // 1e6 * 1e-6 + 1000 + 1e6 * 40 * 1.5e-8 = 1 + 1000 + 0.6
        let c = edge_cost(1e6, &policy(1e-6, 1000.0, 40), 1.5e-8, 0.0);
        assert!((c - 1001.6).abs() < 1e-9, "{c}");
    }

    #[test]
    fn bias_is_additive() {
        let p = policy(2e-6, 17.0, 144);
        let a = edge_cost(5e5, &p, DEFAULT_RF, 0.0);
        let b = edge_cost(5e5, &p, DEFAULT_RF, 50.0);
        assert!((b - a - 50.0).abs() < 1e-9);
    }
}
