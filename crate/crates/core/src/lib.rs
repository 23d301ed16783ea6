//! Bayesian anonymity analysis for peer-to-peer transaction routing.
//!
//! The crate simulates how a transaction travels from its originator under Dandelion,
//! Dandelion++ and Lightning-style source routing, records what colluding adversarial nodes
//! observe, and computes the posterior distribution over possible originators together with
//! its entropy.
//!
//! - [`graph`]: topologies, generators, snapshot I/O, adversary placement
//! - [`hop`]: stem-phase simulation and posteriors for Dandelion and Dandelion++
//! - [`routing`]: fee-based best and best-k routes and Lightning posteriors
//! - [`metrics`]: entropy, min-entropy and sample summaries
//! - [`learning`]: inferring the Dandelion++ privacy subgraph from diffusion counts
//! - [`harness`]: configuration, experiment dispatch and report output

// NaN must fail the positivity checks, so `!(x > 0.0)` is deliberate.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod graph;
pub mod harness;
pub mod hop;
pub mod learning;
pub mod metrics;
pub mod outcome;
pub mod posterior;
pub mod rng;
pub mod routing;

pub use error::{ConfigViolation, Error, Result};
