//! Shared machinery for reporting expected objective values: exact
//! enumeration when the joint support is small, seeded Monte Carlo with a
//! normal-approximation half-width otherwise.

use rand_chacha::ChaCha8Rng;

use crate::dist::{enumerate_joint, joint_outcomes, DiscreteDist, SeedSpec};
use crate::error::Result;

/// Joint-support size below which evaluators default to exact enumeration.
pub const DEFAULT_EXACT_CAP: u128 = 100_000;

/// Default Monte Carlo trial count.
pub const DEFAULT_MC_TRIALS: u64 = 100_000;

/// How to evaluate an expected objective: exact enumeration below
/// `exact_cap` joint outcomes, otherwise `trials` Monte Carlo draws seeded
/// from `seed`.
#[derive(Debug, Clone, Copy)]
pub struct EvalOptions {
    pub exact_cap: u128,
    pub seed: u64,
    pub trials: u64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self { exact_cap: DEFAULT_EXACT_CAP, seed: 0, trials: DEFAULT_MC_TRIALS }
    }
}

/// An expected value, with its provenance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ValueEstimate {
    Exact(f64),
    MonteCarlo { mean: f64, half_width: f64, trials: u64 },
}

impl ValueEstimate {
    pub fn value(&self) -> f64 {
        match *self {
            ValueEstimate::Exact(v) => v,
            ValueEstimate::MonteCarlo { mean, .. } => mean,
        }
    }

    pub fn half_width(&self) -> Option<f64> {
        match *self {
            ValueEstimate::Exact(_) => None,
            ValueEstimate::MonteCarlo { half_width, .. } => Some(half_width),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, ValueEstimate::Exact(_))
    }
}

/// Exact `E[f(V)]` over the product distribution of `ds`.
pub fn expectation_over_joint<F>(ds: &[DiscreteDist], cap: u128, mut f: F) -> Result<f64>
where
    F: FnMut(&[f64]) -> f64,
{
    let mut acc = 0.0;
    for (values, prob) in enumerate_joint(ds, cap)? {
        acc += prob * f(&values);
    }
    Ok(acc)
}

/// Mean of `f` over `trials` independent streams derived from `seed`.
///
/// Stream ids are `base_stream + trial`, so splitting the trial range
/// across workers cannot change the result; the half-width is the 95%
/// normal-approximation bound `1.96·s/√n`.
pub fn monte_carlo<F>(seed: u64, base_stream: u64, trials: u64, mut f: F) -> ValueEstimate
where
    F: FnMut(&mut ChaCha8Rng) -> f64,
{
    assert!(trials >= 2, "need at least two trials for a half-width");
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for t in 0..trials {
        let mut rng = SeedSpec::new(seed, base_stream + t).rng();
        let v = f(&mut rng);
        sum += v;
        sum_sq += v * v;
    }
    let n = trials as f64;
    let mean = sum / n;
    let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
    ValueEstimate::MonteCarlo { mean, half_width: 1.96 * (var / n).sqrt(), trials }
}

/// Evaluates `E[f(V)]` exactly when the joint support of `ds` fits under
/// `exact_cap`, by Monte Carlo otherwise.
pub fn evaluate_expectation<F>(
    ds: &[DiscreteDist],
    exact_cap: u128,
    seed: u64,
    trials: u64,
    mut f: F,
) -> Result<ValueEstimate>
where
    F: FnMut(&[f64]) -> f64,
{
    if joint_outcomes(ds) <= exact_cap {
        return Ok(ValueEstimate::Exact(expectation_over_joint(ds, exact_cap, f)?));
    }
    let mut scratch = vec![0.0; ds.len()];
    Ok(monte_carlo(seed, 0, trials, |rng| {
        for (slot, d) in scratch.iter_mut().zip(ds) {
            *slot = d.sample(rng);
        }
        f(&scratch)
    }))
}
