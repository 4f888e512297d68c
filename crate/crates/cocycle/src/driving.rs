//! Driving systems: the invertible base dynamics that index a cocycle.
//!
//! A driven (quenched) system composes a different operator at every time
//! step, with the choice of operator steered by an orbit of the base map.
//! Two desk-scale realizations are provided:
//!
//! * [`DrivingSystem::FiniteCycle`]: rotation on `{0, .., n-1}` with uniform
//!   base mass. Labels are the points themselves, so a cocycle over a cycle
//!   of length `n` carries one generator per point.
//! * [`DrivingSystem::SampledBernoulliPath`]: one fixed two-sided sample path
//!   of an i.i.d. label sequence, addressed by integer time. The label at
//!   index `t` is a pure function of `(seed, t)`, so the path supports O(1)
//!   random access and never needs to be materialized.
//!
//! Both realizations are ergodic by construction; no ergodicity diagnostic is
//! attempted.

use crate::error::{Error, Result};

/// A point of the base space: a fiber index for a cycle, an integer time for
/// a sampled path.
pub type Point = i64;

/// Tolerance for validating that Bernoulli probabilities sum to one.
pub const PROB_SUM_TOL: f64 = 1e-12;

/// The base dynamics driving a cocycle.
#[derive(Debug, Clone, PartialEq)]
pub enum DrivingSystem {
    /// `p -> p + 1 (mod n)` on `{0, .., n-1}`, uniform base mass `1/n`.
    FiniteCycle { n: usize },
    /// A fixed sample path of an i.i.d. sequence over `{0, .., k-1}` with the
    /// given category probabilities, shifted by `p -> p + 1`.
    SampledBernoulliPath { probs: Vec<f64>, seed: u64 },
}

impl DrivingSystem {
    /// Cycle of length `n >= 1`.
    pub fn cycle(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("cycle length must be >= 1".into()));
        }
        Ok(DrivingSystem::FiniteCycle { n })
    }

    /// Sampled Bernoulli path with the given category probabilities.
    pub fn bernoulli(probs: Vec<f64>, seed: u64) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidArgument("probs must be nonempty".into()));
        }
        if probs.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidArgument(
                "probs must be finite and nonnegative".into(),
            ));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::InvalidArgument(format!(
                "probs must sum to 1 (got {sum})"
            )));
        }
        Ok(DrivingSystem::SampledBernoulliPath { probs, seed })
    }

    /// Number of distinct labels the system can emit. This is the length a
    /// generator table must have.
    pub fn alphabet_size(&self) -> usize {
        match self {
            DrivingSystem::FiniteCycle { n } => *n,
            DrivingSystem::SampledBernoulliPath { probs, .. } => probs.len(),
        }
    }

    /// Whether the base space is finite (a cycle).
    pub fn is_finite(&self) -> bool {
        matches!(self, DrivingSystem::FiniteCycle { .. })
    }

    /// All points of a finite base, in order.
    pub fn points(&self) -> Option<Vec<Point>> {
        match self {
            DrivingSystem::FiniteCycle { n } => Some((0..*n as i64).collect()),
            DrivingSystem::SampledBernoulliPath { .. } => None,
        }
    }

    /// Base mass of one point, for finite systems.
    pub fn point_mass(&self) -> Option<f64> {
        match self {
            DrivingSystem::FiniteCycle { n } => Some(1.0 / *n as f64),
            DrivingSystem::SampledBernoulliPath { .. } => None,
        }
    }

    fn check_point(&self, p: Point) -> Result<()> {
        if let DrivingSystem::FiniteCycle { n } = self {
            if p < 0 || p >= *n as i64 {
                return Err(Error::OutOfRange(format!(
                    "point {p} not in cycle of length {n}"
                )));
            }
        }
        Ok(())
    }

    /// One forward step of the base map.
    pub fn step(&self, p: Point) -> Result<Point> {
        self.check_point(p)?;
        match self {
            DrivingSystem::FiniteCycle { n } => Ok((p + 1).rem_euclid(*n as i64)),
            DrivingSystem::SampledBernoulliPath { .. } => p
                .checked_add(1)
                .ok_or_else(|| Error::OutOfRange("time index overflow".into())),
        }
    }

    /// One backward step of the base map.
    pub fn step_inv(&self, p: Point) -> Result<Point> {
        self.check_point(p)?;
        match self {
            DrivingSystem::FiniteCycle { n } => Ok((p - 1).rem_euclid(*n as i64)),
            DrivingSystem::SampledBernoulliPath { .. } => p
                .checked_sub(1)
                .ok_or_else(|| Error::OutOfRange("time index underflow".into())),
        }
    }

    /// `k`-fold step; negative `k` walks backwards.
    pub fn step_by(&self, p: Point, k: i64) -> Result<Point> {
        self.check_point(p)?;
        match self {
            DrivingSystem::FiniteCycle { n } => Ok((p + k).rem_euclid(*n as i64)),
            DrivingSystem::SampledBernoulliPath { .. } => p
                .checked_add(k)
                .ok_or_else(|| Error::OutOfRange("time index overflow".into())),
        }
    }

    /// Environment label at a point. Indexes a cocycle's generator table.
    pub fn label(&self, p: Point) -> Result<usize> {
        self.check_point(p)?;
        match self {
            DrivingSystem::FiniteCycle { .. } => Ok(p as usize),
            DrivingSystem::SampledBernoulliPath { probs, seed } => {
                Ok(sample_category(probs, *seed, p))
            }
        }
    }

    /// Labels along the backward orbit: `[label(p-1), label(p-2), ..,
    /// label(p-n)]` in that order (most recent past first).
    pub fn past_labels(&self, p: Point, n: usize) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(n);
        let mut q = p;
        for _ in 0..n {
            q = self.step_inv(q)?;
            out.push(self.label(q)?);
        }
        Ok(out)
    }
}

/// splitmix64 finalizer; a standard 64-bit mixer.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic category sample for time `t`: hash `(seed, t)` to a uniform
/// variate and invert the cumulative probabilities.
fn sample_category(probs: &[f64], seed: u64, t: Point) -> usize {
    let h = splitmix64(seed ^ (t as u64).wrapping_mul(0xA076_1D64_78BD_642F));
    // 53 high bits -> uniform in [0, 1).
    let u = (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    let mut acc = 0.0;
    for (k, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return k;
        }
    }
    probs.len() - 1
}
