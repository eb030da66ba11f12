//! Finite discrete distributions over nonnegative reals, deterministic
//! seeded sampling, and joint-support enumeration.
//!
//! Every quantity with uncertainty in this crate (a job size, the point
//! index a metric node resolves to) is a [`DiscreteDist`]. Supports are
//! finite, values distinct and nonnegative, probabilities strictly positive
//! and summing to one. All evaluators in the crate rely on those invariants
//! to enumerate outcomes exactly.

use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
pub use rand_core::RngCore;

use crate::error::{Error, Result};

/// Tolerance accepted on the probability sum before renormalizing.
pub const PROB_SUM_TOLERANCE: f64 = 1e-9;

/// Default hard cap on the number of outcomes `enumerate_joint` will visit.
pub const DEFAULT_JOINT_CAP: u128 = 10_000_000;

/// A finite distribution over distinct nonnegative values.
///
/// The support is stored sorted by value. Probabilities are renormalized to
/// sum to exactly one (up to floating-point rounding) at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDist {
    support: Vec<(f64, f64)>,
}

impl DiscreteDist {
    /// Builds a distribution from `(value, probability)` pairs.
    ///
    /// Duplicate values are merged by summing their mass. The probability
    /// sum must be within [`PROB_SUM_TOLERANCE`] of one; it is then
    /// renormalized exactly.
    pub fn new(pairs: Vec<(f64, f64)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::InvalidDist("empty support".into()));
        }
        for &(v, p) in &pairs {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidDist(format!("support value {v} not a nonnegative real")));
            }
            if !p.is_finite() || p <= 0.0 {
                return Err(Error::InvalidDist(format!("probability {p} not in (0, 1]")));
            }
        }
        let sum: f64 = pairs.iter().map(|&(_, p)| p).sum();
        if (sum - 1.0).abs() > PROB_SUM_TOLERANCE {
            return Err(Error::InvalidDist(format!("probabilities sum to {sum}, expected 1")));
        }
        let mut pairs = pairs;
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite values"));
        let mut support: Vec<(f64, f64)> = Vec::with_capacity(pairs.len());
        for (v, p) in pairs {
            match support.last_mut() {
                Some(last) if last.0 == v => last.1 += p,
                _ => support.push((v, p)),
            }
        }
        for entry in &mut support {
            entry.1 /= sum;
        }
        Ok(Self { support })
    }

    /// A distribution that always takes `value`.
    pub fn point(value: f64) -> Self {
        assert!(value.is_finite() && value >= 0.0, "point mass must be a nonnegative real");
        Self { support: vec![(value, 1.0)] }
    }

    /// Empirical distribution of a sample list (each sample weight 1/n).
    pub fn from_samples(samples: &[f64]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidDist("empty sample list".into()));
        }
        let w = 1.0 / samples.len() as f64;
        Self::new(samples.iter().map(|&v| (v, w)).collect())
    }

    /// `(value, probability)` pairs sorted by value.
    pub fn support(&self) -> &[(f64, f64)] {
        &self.support
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// True when the support is a single value.
    pub fn is_point(&self) -> bool {
        self.support.len() == 1
    }

    pub fn min_value(&self) -> f64 {
        self.support[0].0
    }

    pub fn max_value(&self) -> f64 {
        self.support[self.support.len() - 1].0
    }

    /// Expected value.
    pub fn mean(&self) -> f64 {
        self.support.iter().map(|&(v, p)| v * p).sum()
    }

    /// Draws one value; deterministic given the rng state.
    ///
    /// Uses inverse-CDF over the sorted support with a fixed 53-bit uniform,
    /// so the mapping from rng output to value is platform-independent.
    pub fn sample<R: RngCore>(&self, rng: &mut R) -> f64 {
        let u = unit_f64(rng);
        let mut acc = 0.0;
        for &(v, p) in &self.support {
            acc += p;
            if u < acc {
                return v;
            }
        }
        // Rounding can leave acc slightly below 1; the last value owns the gap.
        self.support[self.support.len() - 1].0
    }
}

/// Uniform draw in [0, 1) from the top 53 bits of one `u64`.
pub fn unit_f64<R: RngCore>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform index in `0..n`.
pub fn index_below<R: RngCore>(rng: &mut R, n: usize) -> usize {
    debug_assert!(n > 0);
    let u = unit_f64(rng);
    ((u * n as f64) as usize).min(n - 1)
}

/// Identifies one reproducible random stream.
///
/// Streams with equal `(master_seed, stream_id)` produce identical
/// sequences on every platform; distinct stream ids give statistically
/// independent streams, so Monte Carlo work can be split by stream without
/// affecting results.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        Self { master_seed, stream_id }
    }

    /// The generator for this stream, keyed by hashing (master, stream).
    pub fn rng(&self) -> ChaCha8Rng {
        let mut state = self
            .master_seed
            .wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(self.stream_id.wrapping_add(1)));
        let mut seed = [0u8; 32];
        for chunk in seed.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        ChaCha8Rng::from_seed(seed)
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Exact `E[min(wb·Xa, wa·Xb)]` for independent `Xa ~ da`, `Xb ~ db`,
/// by enumerating all support pairs.
pub fn pairwise_expect_min(da: &DiscreteDist, wa: f64, db: &DiscreteDist, wb: f64) -> f64 {
    debug_assert!(wa >= 0.0 && wb >= 0.0);
    let mut acc = 0.0;
    for &(va, pa) in da.support() {
        for &(vb, pb) in db.support() {
            acc += pa * pb * (wb * va).min(wa * vb);
        }
    }
    acc
}

/// Number of outcomes in the product support of `ds`, saturating so that
/// oversized products still compare correctly against caps.
pub fn joint_outcomes(ds: &[DiscreteDist]) -> u128 {
    ds.iter().fold(1u128, |acc, d| acc.saturating_mul(d.len() as u128))
}

/// Iterates every realization of the product distribution with its joint
/// probability. Fails upfront when the product support exceeds `cap`.
pub fn enumerate_joint<'a>(ds: &'a [DiscreteDist], cap: u128) -> Result<JointIter<'a>> {
    let needed = joint_outcomes(ds);
    if needed > cap {
        return Err(Error::EnumerationTooLarge { needed, cap });
    }
    Ok(JointIter { ds, odometer: vec![0; ds.len()], done: false })
}

#[derive(Debug)]
pub struct JointIter<'a> {
    ds: &'a [DiscreteDist],
    odometer: Vec<usize>,
    done: bool,
}

impl Iterator for JointIter<'_> {
    type Item = (Vec<f64>, f64);

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let mut values = Vec::with_capacity(self.ds.len());
        let mut prob = 1.0;
        for (d, &k) in self.ds.iter().zip(&self.odometer) {
            let (v, p) = d.support()[k];
            values.push(v);
            prob *= p;
        }
        // Advance the odometer, least-significant position last.
        self.done = true;
        for pos in (0..self.ds.len()).rev() {
            self.odometer[pos] += 1;
            if self.odometer[pos] < self.ds[pos].len() {
                self.done = false;
                break;
            }
            self.odometer[pos] = 0;
        }
        if self.ds.is_empty() {
            self.done = true;
        }
        Some((values, prob))
    }
}
