//! Per-transaction results shared by every scheme's experiment driver.

use serde::Serialize;

use crate::metrics::{intercept_fraction, min_entropy, shannon_entropy};
use crate::posterior::{ObservationKey, Posterior};
use crate::Result;

/// One intercepted transaction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TxRecord {
    pub run: usize,
    pub observation: ObservationKey,
    pub entropy_bits: f64,
    pub min_entropy_bits: f64,
    pub support: usize,
}

impl TxRecord {
    pub fn from_posterior(run: usize, p: &Posterior) -> Result<TxRecord> {
        Ok(TxRecord {
            run,
            observation: p.observation(),
            entropy_bits: shannon_entropy(p)?,
            min_entropy_bits: min_entropy(p)?,
            support: p.support_size(),
        })
    }
}

/// Records plus transaction counts for one or more runs.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Outcome {
    pub records: Vec<TxRecord>,
    pub transactions: u64,
    pub intercepted: u64,
}

impl Outcome {
    /// Concatenate, then order records by `(run, observation)`.
    pub fn merge(parts: impl IntoIterator<Item = Outcome>) -> Outcome {
        let mut all = Outcome::default();
        for p in parts {
            all.records.extend(p.records);
            all.transactions += p.transactions;
            all.intercepted += p.intercepted;
        }
        all.sort();
        all
    }

    pub fn sort(&mut self) {
        self.records
            .sort_by_key(|r| (r.run, r.observation));
    }

    pub fn intercept_fraction(&self) -> Result<f64> {
        intercept_fraction(self.intercepted, self.transactions)
    }

    pub fn entropies(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.entropy_bits).collect()
    }
}
