//! Entropy measures and sample summaries.

use serde::{Deserialize, Serialize};

use crate::posterior::Posterior;
use crate::{Error, Result};

/// How quartiles are computed; echoed into report metadata.
pub const QUANTILE_METHOD: &str =
    "linear interpolation between closest ranks: q(p) = x[floor(h)] + (h - floor(h)) * (x[floor(h)+1] - x[floor(h)]), h = (n-1)p";

const NORMALIZATION_SLACK: f64 = 1e-6;
const NEGLIGIBLE: f64 = 1e-300;

fn check_normalized(values: &[f64]) -> Result<()> {
    if values.iter().any(|&p| !(0.0..=1.0 + NORMALIZATION_SLACK).contains(&p)) {
        return Err(Error::InvariantViolation(
            "probabilities must lie in [0, 1]".into(),
        ));
    }
    let total: f64 = values.iter().sum();
    if (total - 1.0).abs() > NORMALIZATION_SLACK {
        return Err(Error::InvariantViolation(format!(
            "probabilities sum to {total}, not 1"
        )));
    }
    Ok(())
}

/// `-sum p log2 p` over a probability vector.
pub fn entropy_bits(values: &[f64]) -> Result<f64> {
    check_normalized(values)?;
    let h: f64 = values
        .iter()
        .filter(|&&p| p > NEGLIGIBLE)
        .map(|&p| -p * p.log2())
        .sum();
    Ok(h.max(0.0))
}

/// `-log2 max p` over a probability vector.
pub fn min_entropy_bits(values: &[f64]) -> Result<f64> {
    check_normalized(values)?;
    let max = values.iter().copied().fold(0.0, f64::max);
    Ok((-max.log2()).max(0.0))
}

pub fn shannon_entropy(p: &Posterior) -> Result<f64> {
    entropy_bits(&p.values().collect::<Vec<_>>())
}

pub fn min_entropy(p: &Posterior) -> Result<f64> {
    min_entropy_bits(&p.values().collect::<Vec<_>>())
}

/// Number of equally likely suspects carrying `h` bits: `2^h`.
pub fn effective_anonymity_set(h: f64) -> f64 {
    h.exp2()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
}

/// Quantile `p` of an ascending sample, see [`QUANTILE_METHOD`].
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn median(samples: &[f64]) -> Result<f64> {
    summarize(samples).map(|s| s.median)
}

pub fn summarize(samples: &[f64]) -> Result<Summary> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("no samples to summarize".into()));
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(Error::invalid("sample contains NaN"));
    }
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    // sum in sorted order so the mean does not depend on input order
    let mean = s.iter().sum::<f64>() / s.len() as f64;
    Ok(Summary {
        count: s.len(),
        min: s[0],
        q1: quantile_sorted(&s, 0.25),
        median: quantile_sorted(&s, 0.5),
        q3: quantile_sorted(&s, 0.75),
        max: s[s.len() - 1],
        mean,
    })
}

pub fn intercept_fraction(intercepted: u64, total: u64) -> Result<f64> {
    if total == 0 {
        return Err(Error::EmptyInput("no transactions".into()));
    }
    if intercepted > total {
        return Err(Error::invalid(format!(
            "intercepted {intercepted} exceeds total {total}"
        )));
    }
    Ok(intercepted as f64 / total as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_examples() {
        assert!((entropy_bits(&[0.125; 8]).unwrap() - 3.0).abs() < 1e-12);
        assert_eq!(entropy_bits(&[1.0]).unwrap(), 0.0);
        let h = entropy_bits(&[2.0 / 3.0, 1.0 / 3.0]).unwrap();
        assert!((h - 0.918_295_834_054_489_6).abs() < 1e-12);
        assert!(entropy_bits(&[0.5, 0.4]).is_err());
    }

    #[test]
    fn min_entropy_examples() {
        assert!((min_entropy_bits(&[0.125; 8]).unwrap() - 3.0).abs() < 1e-12);
        assert_eq!(min_entropy_bits(&[0.5, 0.49, 0.01]).unwrap(), 1.0);
    }

    #[test]
    fn anonymity_set() {
        assert_eq!(effective_anonymity_set(5.0), 32.0);
        assert_eq!(effective_anonymity_set(0.0), 1.0);
        assert_eq!(effective_anonymity_set(3.0), 8.0);
    }

    #[test]
    fn summaries() {
        assert_eq!(summarize(&[1.0, 2.0, 3.0]).unwrap().median, 2.0);
        let z = summarize(&[0.0; 4]).unwrap();
        assert_eq!((z.min, z.q1, z.median, z.q3, z.max, z.mean), (0.0, 0.0, 0.0, 0.0, 0.0, 0.0));
        let s = summarize(&[4.0, 1.0, 3.0, 2.0]).unwrap();
        assert_eq!((s.q1, s.median, s.q3), (1.75, 2.5, 3.25));
        assert!(matches!(summarize(&[]), Err(Error::EmptyInput(_))));
    }

    #[test]
    fn fractions() {
        assert_eq!(intercept_fraction(715, 1000).unwrap(), 0.715);
        assert_eq!(intercept_fraction(0, 7).unwrap(), 0.0);
        assert_eq!(intercept_fraction(7, 7).unwrap(), 1.0);
        assert!(matches!(intercept_fraction(0, 0), Err(Error::EmptyInput(_))));
    }
}
