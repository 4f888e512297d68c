//! Piecewise monotone self-maps of the unit interval.
//!
//! A [`PiecewiseMap`] is a finite list of branches whose domains partition
//! `[0, 1)`. Each branch is strictly monotone with an explicit derivative
//! and an invertible formula, so downstream code can compute exact interval
//! images, branch preimages, and derivatives along backward orbits.

use crate::error::{Error, Result};

/// Matching tolerance for branch endpoints when validating that the branch
/// domains tile `[0, 1)`.
const ENDPOINT_TOL: f64 = 1e-12;

/// Absolute tolerance on the preimage coordinate for iterative branch
/// inversion.
const INVERT_TOL: f64 = 1e-13;

/// Closed-form branch formulas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BranchFormula {
    /// `x ↦ slope · x + intercept`.
    Affine {
        /// Multiplicative coefficient; must be nonzero.
        slope: f64,
        /// Additive coefficient.
        intercept: f64,
    },
    /// The intermittent left branch `x ↦ x · (1 + 2^γ · x^γ)` with a
    /// neutral fixed point at the origin. Only defined for domains inside
    /// `[0, 1/2]`, where it maps onto `[0, 1]` monotonically.
    LsvLeft {
        /// Intermittency exponent; must be positive. Larger values make the
        /// neutral fixed point stickier.
        gamma: f64,
    },
}

impl BranchFormula {
    fn eval(&self, x: f64) -> f64 {
        match *self {
            BranchFormula::Affine { slope, intercept } => slope * x + intercept,
            BranchFormula::LsvLeft { gamma } => x * (1.0 + 2f64.powf(gamma) * x.powf(gamma)),
        }
    }

    fn derivative(&self, x: f64) -> f64 {
        match *self {
            BranchFormula::Affine { slope, .. } => slope,
            BranchFormula::LsvLeft { gamma } => {
                1.0 + 2f64.powf(gamma) * (1.0 + gamma) * x.powf(gamma)
            }
        }
    }
}

/// One strictly monotone branch of a piecewise map, defined on `[lo, hi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    /// Left endpoint of the branch domain (inclusive).
    pub lo: f64,
    /// Right endpoint of the branch domain (exclusive).
    pub hi: f64,
    /// The formula applied on the domain.
    pub formula: BranchFormula,
}

impl Branch {
    /// Creates a branch after checking its domain and formula constraints.
    pub fn new(lo: f64, hi: f64, formula: BranchFormula) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
            return Err(Error::InvalidArgument(format!(
                "branch domain [{lo}, {hi}) is empty or not finite"
            )));
        }
        if lo < -ENDPOINT_TOL || hi > 1.0 + ENDPOINT_TOL {
            return Err(Error::InvalidArgument(format!(
                "branch domain [{lo}, {hi}) leaves the unit interval"
            )));
        }
        match formula {
            BranchFormula::Affine { slope, .. } => {
                if slope == 0.0 || !slope.is_finite() {
                    return Err(Error::InvalidArgument(format!(
                        "affine branch slope {slope} is not strictly monotone"
                    )));
                }
            }
            BranchFormula::LsvLeft { gamma } => {
                if !(gamma > 0.0) || !gamma.is_finite() {
                    return Err(Error::InvalidArgument(format!(
                        "intermittent branch exponent {gamma} must be positive"
                    )));
                }
                if hi > 0.5 + ENDPOINT_TOL {
                    return Err(Error::InvalidArgument(format!(
                        "intermittent branch domain [{lo}, {hi}) extends past 1/2"
                    )));
                }
            }
        }
        let branch = Branch { lo, hi, formula };
        let (ylo, yhi) = branch.image();
        if ylo < -1e-9 || yhi > 1.0 + 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "branch image [{ylo}, {yhi}] leaves the unit interval"
            )));
        }
        Ok(branch)
    }

    /// Applies the branch formula. Valid on the closed domain `[lo, hi]`.
    pub fn eval(&self, x: f64) -> f64 {
        self.formula.eval(x)
    }

    /// Derivative of the branch formula at `x`.
    pub fn derivative(&self, x: f64) -> f64 {
        self.formula.derivative(x)
    }

    /// Whether the branch is increasing.
    pub fn increasing(&self) -> bool {
        match self.formula {
            BranchFormula::Affine { slope, .. } => slope > 0.0,
            BranchFormula::LsvLeft { .. } => true,
        }
    }

    /// Ordered endpoints `(min, max)` of the image of the closed domain.
    pub fn image(&self) -> (f64, f64) {
        let a = self.eval(self.lo);
        let b = self.eval(self.hi);
        if a <= b {
            (a, b)
        } else {
            (b, a)
        }
    }

    /// Preimage of `y` under the branch, for `y` in the closed image.
    ///
    /// Affine branches invert in closed form; the intermittent branch is
    /// inverted by bisection to an absolute tolerance of `1e-13`, which is
    /// possible because its derivative is bounded below by 1.
    pub fn invert(&self, y: f64) -> f64 {
        match self.formula {
            BranchFormula::Affine { slope, intercept } => {
                let x = (y - intercept) / slope;
                x.clamp(self.lo, self.hi)
            }
            BranchFormula::LsvLeft { .. } => {
                let (mut lo, mut hi) = (self.lo, self.hi);
                if y <= self.eval(lo) {
                    return lo;
                }
                if y >= self.eval(hi) {
                    return hi;
                }
                while hi - lo > INVERT_TOL {
                    let mid = 0.5 * (lo + hi);
                    if self.eval(mid) < y {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            }
        }
    }
}

/// A validated piecewise monotone map of `[0, 1)` onto itself.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseMap {
    branches: Vec<Branch>,
}

impl PiecewiseMap {
    /// Builds a map from branches whose domains tile `[0, 1)` in order.
    pub fn new(branches: Vec<Branch>) -> Result<Self> {
        if branches.is_empty() {
            return Err(Error::InvalidArgument(
                "a piecewise map needs at least one branch".into(),
            ));
        }
        if branches[0].lo.abs() > ENDPOINT_TOL {
            return Err(Error::InvalidArgument(format!(
                "first branch starts at {} instead of 0",
                branches[0].lo
            )));
        }
        for pair in branches.windows(2) {
            if (pair[1].lo - pair[0].hi).abs() > ENDPOINT_TOL {
                return Err(Error::InvalidArgument(format!(
                    "branch domains leave a gap between {} and {}",
                    pair[0].hi, pair[1].lo
                )));
            }
        }
        let last = branches.last().expect("nonempty");
        if (last.hi - 1.0).abs() > ENDPOINT_TOL {
            return Err(Error::InvalidArgument(format!(
                "last branch ends at {} instead of 1",
                last.hi
            )));
        }
        Ok(PiecewiseMap { branches })
    }

    /// The full-branch map `x ↦ 2x mod 1`.
    pub fn doubling() -> Self {
        Self::affine_mod(2).expect("two full affine branches are valid")
    }

    /// The full-branch map `x ↦ 3x mod 1`.
    pub fn tripling() -> Self {
        Self::affine_mod(3).expect("three full affine branches are valid")
    }

    /// The full-branch map `x ↦ kx mod 1` with `k ≥ 1` affine branches.
    pub fn affine_mod(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument(
                "x -> kx mod 1 needs k >= 1".into(),
            ));
        }
        let branches = (0..k)
            .map(|j| {
                Branch::new(
                    j as f64 / k as f64,
                    (j + 1) as f64 / k as f64,
                    BranchFormula::Affine {
                        slope: k as f64,
                        intercept: -(j as f64),
                    },
                )
            })
            .collect::<Result<Vec<_>>>()?;
        PiecewiseMap::new(branches)
    }

    /// The identity map as a single affine branch.
    pub fn identity_map() -> Self {
        let branch = Branch::new(
            0.0,
            1.0,
            BranchFormula::Affine {
                slope: 1.0,
                intercept: 0.0,
            },
        )
        .expect("identity branch is valid");
        PiecewiseMap::new(vec![branch]).expect("identity map is valid")
    }

    /// The intermittent map with neutral fixed point at 0: the branch
    /// `x(1 + 2^γ x^γ)` on `[0, 1/2)` followed by `2x − 1` on `[1/2, 1)`.
    pub fn lsv(gamma: f64) -> Result<Self> {
        let left = Branch::new(0.0, 0.5, BranchFormula::LsvLeft { gamma })?;
        let right = Branch::new(
            0.5,
            1.0,
            BranchFormula::Affine {
                slope: 2.0,
                intercept: -1.0,
            },
        )?;
        PiecewiseMap::new(vec![left, right])
    }

    /// The branches in domain order.
    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    /// Index of the branch whose domain contains `x ∈ [0, 1)`.
    pub fn branch_index(&self, x: f64) -> Result<usize> {
        if !(0.0..1.0).contains(&x) {
            return Err(Error::OutOfRange(format!(
                "point {x} is outside the unit interval"
            )));
        }
        // Last branch whose left endpoint does not exceed x; linear scan is
        // fine at the branch counts in play.
        let idx = self
            .branches
            .iter()
            .rposition(|b| b.lo <= x)
            .expect("first branch starts at 0");
        Ok(idx)
    }

    /// Applies the map at `x ∈ [0, 1)`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        let idx = self.branch_index(x)?;
        Ok(self.branches[idx].eval(x))
    }

    /// Derivative at `x ∈ [0, 1)` (one-sided at branch endpoints).
    pub fn derivative(&self, x: f64) -> Result<f64> {
        let idx = self.branch_index(x)?;
        Ok(self.branches[idx].derivative(x))
    }

    /// Number of branches.
    pub fn branch_count(&self) -> usize {
        self.branches.len()
    }
}
