//! Streaming long-run averages and averaged fixed-point iteration.
//!
//! [`CesaroEstimator`] absorbs a stream of vectors `u_1, u_2, ...` and
//! estimates the limit of the running averages `A_n = (u_1 + .. + u_n) / n`
//! in O(dim) memory. Two settling signals are tracked:
//!
//! - *iterate settled*: the iterates themselves stop moving (three
//!   consecutive steps with `||u_n - u_{n-1}||_1 < tol`); the tail iterate is
//!   then the better limit estimate, since running averages drag an `O(1/n)`
//!   transient behind them;
//! - *average gap*: at geometrically spaced checkpoints the running average
//!   is compared with the average from at least a quarter-horizon ago,
//!   `||A_n - A_m||_1 < tol` with `m <= n - ceil(n/4)`.
//!
//! Either signal marks the estimator converged. The certificates are
//! evidence of settling, not error bounds; callers that need guaranteed
//! accuracy check residuals of the returned object (for example the
//! one-step defect of a candidate invariant family) rather than trusting the
//! certificate value.
//!
//! [`averaged_fixed_point`] polishes a fixed-point candidate by iterating
//! the half-step map `v -> (v + L v) / 2`. For any matrix with spectrum in
//! the closed unit disk this converges geometrically to a fixed vector of
//! `L` whenever plain iteration is merely bounded, because the map
//! `z -> (1 + z) / 2` pulls every unit-modulus point except `1` strictly
//! inside the disk. [`averaged_projector`] is the matrix version, iterating
//! from the identity to produce the spectral projector onto the fixed space;
//! its defect `||L P - P||` certifies operator-norm convergence of the
//! averages of `L`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::max_column_abs_sum;

/// How many consecutive small iterate deltas count as "settled".
const SETTLED_RUN: usize = 3;

/// How the limit estimate of a [`CesaroEstimator`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CesaroMode {
    /// Iterates stopped moving; the limit is the tail iterate.
    IterateSettled,
    /// Running averages stopped moving across a quarter-horizon gap.
    AverageGap,
}

impl std::fmt::Display for CesaroMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CesaroMode::IterateSettled => write!(f, "iterate-settled"),
            CesaroMode::AverageGap => write!(f, "average-gap"),
        }
    }
}

/// Final state of a [`CesaroEstimator`] run.
#[derive(Debug, Clone)]
pub struct CesaroOutcome {
    /// Best available limit estimate.
    pub limit: DVector<f64>,
    /// Number of iterates absorbed.
    pub steps: usize,
    /// Whether a settling certificate was met.
    pub converged: bool,
    /// Value of the last certificate comparison (delta or gap distance).
    pub certificate: f64,
    /// Which settling signal fired, if any.
    pub mode: Option<CesaroMode>,
}

/// Streaming estimator for the limit of running averages of a vector stream.
#[derive(Debug, Clone)]
pub struct CesaroEstimator {
    tol: f64,
    n: usize,
    sum: DVector<f64>,
    prev: Option<DVector<f64>>,
    settled_run: usize,
    /// Most recent checkpoint average; by construction it always lies at
    /// least a quarter-horizon behind the next checkpoint.
    checkpoint: Option<(usize, DVector<f64>)>,
    next_checkpoint: usize,
    last_certificate: f64,
    converged: bool,
    mode: Option<CesaroMode>,
}

impl CesaroEstimator {
    pub fn new(dim: usize, tol: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DimensionMismatch("dimension must be >= 1".into()));
        }
        if !(tol > 0.0) {
            return Err(Error::InvalidArgument("tolerance must be > 0".into()));
        }
        Ok(CesaroEstimator {
            tol,
            n: 0,
            sum: DVector::zeros(dim),
            prev: None,
            settled_run: 0,
            checkpoint: None,
            next_checkpoint: 1,
            last_certificate: f64::INFINITY,
            converged: false,
            mode: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.sum.len()
    }

    pub fn steps(&self) -> usize {
        self.n
    }

    pub fn is_converged(&self) -> bool {
        self.converged
    }

    /// Absorb the next iterate of the stream.
    pub fn push(&mut self, u: &DVector<f64>) -> Result<()> {
        if u.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "estimator dim {} vs iterate dim {}",
                self.dim(),
                u.len()
            )));
        }
        self.n += 1;
        self.sum += u;

        if let Some(prev) = &self.prev {
            let delta: f64 = (u - prev).iter().map(|x| x.abs()).sum();
            if delta < self.tol {
                self.settled_run += 1;
                if self.settled_run >= SETTLED_RUN && !self.converged {
                    self.converged = true;
                    self.mode = Some(CesaroMode::IterateSettled);
                    self.last_certificate = delta;
                }
            } else {
                self.settled_run = 0;
            }
        }
        match &mut self.prev {
            Some(prev) => prev.copy_from(u),
            None => self.prev = Some(u.clone()),
        }

        if self.n == self.next_checkpoint {
            let avg = self.average();
            if let Some((m, old)) = &self.checkpoint {
                debug_assert!(*m <= self.n - self.n.div_ceil(4));
                let gap: f64 = (&avg - old).iter().map(|x| x.abs()).sum();
                self.last_certificate = gap;
                if gap < self.tol && !self.converged {
                    self.converged = true;
                    self.mode = Some(CesaroMode::AverageGap);
                }
            }
            self.checkpoint = Some((self.n, avg));
            // growth factor of at least 4/3 keeps the previous checkpoint at
            // least ceil(n/4) behind the next one
            self.next_checkpoint = self.n + (self.n.div_ceil(3)).max(1);
        }
        Ok(())
    }

    /// Current running average `A_n`.
    pub fn average(&self) -> DVector<f64> {
        if self.n == 0 {
            self.sum.clone()
        } else {
            &self.sum / self.n as f64
        }
    }

    /// Best current limit estimate (tail iterate when settled, average
    /// otherwise).
    pub fn limit_estimate(&self) -> DVector<f64> {
        match (self.mode, &self.prev) {
            (Some(CesaroMode::IterateSettled), Some(prev)) => prev.clone(),
            _ => self.average(),
        }
    }

    pub fn outcome(&self) -> CesaroOutcome {
        CesaroOutcome {
            limit: self.limit_estimate(),
            steps: self.n,
            converged: self.converged,
            certificate: self.last_certificate,
            mode: self.mode,
        }
    }
}

/// Scalar twin of [`CesaroEstimator`], used when many coordinates are
/// averaged independently over one shared stream.
#[derive(Debug, Clone)]
pub struct ScalarCesaro {
    tol: f64,
    n: usize,
    sum: f64,
    prev: Option<f64>,
    settled_run: usize,
    checkpoint: Option<(usize, f64)>,
    next_checkpoint: usize,
    last_certificate: f64,
    converged: bool,
    mode: Option<CesaroMode>,
}

impl ScalarCesaro {
    pub fn new(tol: f64) -> Result<Self> {
        if !(tol > 0.0) {
            return Err(Error::InvalidArgument("tolerance must be > 0".into()));
        }
        Ok(ScalarCesaro {
            tol,
            n: 0,
            sum: 0.0,
            prev: None,
            settled_run: 0,
            checkpoint: None,
            next_checkpoint: 1,
            last_certificate: f64::INFINITY,
            converged: false,
            mode: None,
        })
    }

    pub fn push(&mut self, u: f64) {
        self.n += 1;
        self.sum += u;
        if let Some(prev) = self.prev {
            let delta = (u - prev).abs();
            if delta < self.tol {
                self.settled_run += 1;
                if self.settled_run >= SETTLED_RUN && !self.converged {
                    self.converged = true;
                    self.mode = Some(CesaroMode::IterateSettled);
                    self.last_certificate = delta;
                }
            } else {
                self.settled_run = 0;
            }
        }
        self.prev = Some(u);

        if self.n == self.next_checkpoint {
            let avg = self.average();
            if let Some((_, old)) = self.checkpoint {
                let gap = (avg - old).abs();
                self.last_certificate = gap;
                if gap < self.tol && !self.converged {
                    self.converged = true;
                    self.mode = Some(CesaroMode::AverageGap);
                }
            }
            self.checkpoint = Some((self.n, avg));
            self.next_checkpoint = self.n + (self.n.div_ceil(3)).max(1);
        }
    }

    pub fn steps(&self) -> usize {
        self.n
    }

    pub fn is_converged(&self) -> bool {
        self.converged
    }

    pub fn certificate(&self) -> f64 {
        self.last_certificate
    }

    pub fn mode(&self) -> Option<CesaroMode> {
        self.mode
    }

    /// Running average at the current horizon. All estimators sharing one
    /// stream report at the same horizon, which keeps sums of per-coordinate
    /// averages consistent with averages of coordinate sums to rounding.
    pub fn average(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.sum / self.n as f64
        }
    }

    /// Best current limit estimate: the tail iterate when the iterates
    /// settled (the running average still carries its O(1/n) transient
    /// then), the running average otherwise. Linear in the pushed values
    /// either way, so additivity across estimators sharing one stream
    /// survives to rounding.
    pub fn limit_estimate(&self) -> f64 {
        match (self.mode, self.prev) {
            (Some(CesaroMode::IterateSettled), Some(prev)) => prev,
            _ => self.average(),
        }
    }
}

/// Outcome of an averaged fixed-point iteration.
#[derive(Debug, Clone)]
pub struct FixedPointOutcome {
    /// The polished vector.
    pub point: DVector<f64>,
    /// Fixed-point defect `||L v - v||_1` of the returned vector.
    pub residual: f64,
    /// Half-step iterations performed.
    pub steps: usize,
    /// Whether the residual dropped below the requested tolerance.
    pub converged: bool,
}

/// Iterate `v -> (v + L v) / 2` until the fixed-point defect
/// `||L v - v||_1` drops below `tol` or `max_steps` is exhausted. `apply`
/// must be (close to) linear with spectrum in the closed unit disk — e.g.
/// the action of a column-stochastic matrix — so the iteration converges
/// geometrically to a fixed vector.
pub fn averaged_fixed_point(
    mut apply: impl FnMut(&DVector<f64>, &mut DVector<f64>),
    start: &DVector<f64>,
    tol: f64,
    max_steps: usize,
) -> Result<FixedPointOutcome> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be > 0".into()));
    }
    let mut v = start.clone();
    let mut image = DVector::zeros(v.len());
    let mut residual = f64::INFINITY;
    for step in 0..=max_steps {
        apply(&v, &mut image);
        residual = image
            .iter()
            .zip(v.iter())
            .map(|(a, b)| (a - b).abs())
            .sum();
        if residual <= tol {
            return Ok(FixedPointOutcome {
                point: v,
                residual,
                steps: step,
                converged: true,
            });
        }
        if step == max_steps {
            break;
        }
        // v <- (v + L v) / 2
        v.zip_apply(&image, |a, b| *a = 0.5 * (*a + b));
    }
    Ok(FixedPointOutcome {
        point: v,
        residual,
        steps: max_steps,
        converged: false,
    })
}

/// Outcome of the matrix averaged iteration.
#[derive(Debug, Clone)]
pub struct ProjectorOutcome {
    /// Estimate of the spectral projector onto the fixed space of `L`.
    pub projector: DMatrix<f64>,
    /// `||L P - P||` in the max-column-sum norm.
    pub defect: f64,
    /// `||P P - P||` in the max-column-sum norm (idempotency check).
    pub idempotency_defect: f64,
    /// Half-step iterations performed.
    pub steps: usize,
    pub converged: bool,
}

/// Iterate `V -> (V + L V) / 2` from the identity. For a column-stochastic
/// `L` this converges geometrically to the spectral projector `P` onto the
/// fixed space of `L`, and a small defect `||L P - P||` certifies that the
/// operator averages `(I + L + .. + L^{n-1}) / n` converge in norm (their
/// limit is `P`).
pub fn averaged_projector(l: &DMatrix<f64>, tol: f64, max_steps: usize) -> Result<ProjectorOutcome> {
    if l.nrows() != l.ncols() || l.nrows() == 0 {
        return Err(Error::DimensionMismatch(
            "projector iteration needs a nonempty square matrix".into(),
        ));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be > 0".into()));
    }
    let d = l.nrows();
    let mut v = DMatrix::<f64>::identity(d, d);
    let mut defect = f64::INFINITY;
    let mut steps = max_steps;
    let mut converged = false;
    for step in 0..=max_steps {
        let image = l * &v;
        defect = max_column_abs_sum(&(&image - &v));
        if defect <= tol {
            steps = step;
            converged = true;
            break;
        }
        if step == max_steps {
            break;
        }
        v = (&v + &image) * 0.5;
    }
    let idempotency_defect = max_column_abs_sum(&(&v * &v - &v));
    Ok(ProjectorOutcome {
        projector: v,
        defect,
        idempotency_defect,
        steps,
        converged,
    })
}
