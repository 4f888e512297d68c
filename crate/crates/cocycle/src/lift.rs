//! The single-matrix lift of a cocycle over a finite cycle, and the
//! skew-product view it coincides with.
//!
//! For a cycle of length `n` and fiber dimension `d`, densities on all
//! fibers at once live in `R^{n·d}`; the embedding `ι` scales each fiber by
//! its base mass `1/n`, so that total mass over the product space is 1. The
//! lift is the `(n·d) × (n·d)` column-stochastic matrix acting fiberwise by
//!
//! ```text
//!   (L v)(w) = G_{s^{-1} w} v(s^{-1} w),
//! ```
//!
//! i.e. block `(row s w, col w)` holds the generator acting at `w`. Fixed
//! points of `L` pull back through `ι` to invariant families of fiber
//! densities with equal fiber masses, and a family of interval maps
//! discretizes to exactly this block structure when its skew product
//! `(w, x) -> (s w, T_w x)` is projected on the product partition.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::cesaro::{averaged_fixed_point, averaged_projector, CesaroEstimator, CesaroMode};
use crate::density::Density;
use crate::driving::DrivingSystem;
use crate::error::{Error, Result};
use crate::linalg::gemv_into;
use crate::markov::{MarkovCocycle, MarkovMatrix, RandomDensity};
use crate::transfer::family::RandomMapFamily;
use crate::transfer::ulam::{ulam_matrix, Partition, UlamOptions};

/// Entries below this are treated as zero when reading off a support.
pub const SUPPORT_TOL: f64 = 1e-12;

/// Largest flat dimension for the matrix-valued mean-ergodic certificate;
/// beyond it vector probes are used.
const PROJECTOR_DIM_CAP: usize = 256;

/// Largest flat dimension for probe-based certificates; beyond it the
/// certificate is skipped.
const PROBE_DIM_CAP: usize = 1024;

/// Addressing scheme for the flat product space: fiber `w`, cell `i` lives
/// at `w * dim + i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlatIndex {
    n_fibers: usize,
    dim: usize,
}

impl FlatIndex {
    pub fn new(n_fibers: usize, dim: usize) -> Result<Self> {
        if n_fibers == 0 || dim == 0 {
            return Err(Error::DimensionMismatch(
                "flat index needs n_fibers >= 1 and dim >= 1".into(),
            ));
        }
        Ok(FlatIndex { n_fibers, dim })
    }

    pub fn n_fibers(&self) -> usize {
        self.n_fibers
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.n_fibers * self.dim
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn flat(&self, fiber: usize, cell: usize) -> usize {
        debug_assert!(fiber < self.n_fibers && cell < self.dim);
        fiber * self.dim + cell
    }

    pub fn unflat(&self, k: usize) -> (usize, usize) {
        debug_assert!(k < self.len());
        (k / self.dim, k % self.dim)
    }
}

/// The lift matrix together with its block addressing.
#[derive(Debug, Clone)]
pub struct LiftMatrix {
    matrix: MarkovMatrix,
    index: FlatIndex,
}

impl LiftMatrix {
    pub fn matrix(&self) -> &MarkovMatrix {
        &self.matrix
    }

    pub fn index(&self) -> &FlatIndex {
        &self.index
    }

    /// Copy of the `(row_fiber, col_fiber)` block.
    pub fn block(&self, row_fiber: usize, col_fiber: usize) -> DMatrix<f64> {
        let d = self.index.dim;
        self.matrix
            .as_matrix()
            .view((row_fiber * d, col_fiber * d), (d, d))
            .into_owned()
    }
}

/// Assemble a block matrix with `blocks[w]` placed at
/// `(row (w+1) mod n, col w)`; shared by the lift and by coboundary
/// fitting on non-stochastic generator tables.
pub(crate) fn assemble_block_shift(blocks: &[&DMatrix<f64>]) -> DMatrix<f64> {
    let n = blocks.len();
    let d = blocks[0].nrows();
    let mut m = DMatrix::<f64>::zeros(n * d, n * d);
    for (w, block) in blocks.iter().enumerate() {
        let target = (w + 1) % n;
        m.view_mut((target * d, w * d), (d, d)).copy_from(*block);
    }
    m
}

/// Build the lift of a cocycle over a finite cycle.
pub fn build_lift(c: &MarkovCocycle) -> Result<LiftMatrix> {
    let DrivingSystem::FiniteCycle { n } = c.driving() else {
        return Err(Error::Unsupported(
            "the lift is a finite matrix only over a finite cycle".into(),
        ));
    };
    let n = *n;
    let index = FlatIndex::new(n, c.dim())?;
    let blocks: Vec<&DMatrix<f64>> = (0..n)
        .map(|w| Ok(c.operator_at(w as i64)?.as_matrix()))
        .collect::<Result<_>>()?;
    let matrix = MarkovMatrix::new(assemble_block_shift(&blocks))?;
    Ok(LiftMatrix { matrix, index })
}

/// Embed a fiber family into the flat product space: fiber `w` scaled by
/// the base mass `1/n`. An isometry onto its image: flat l1 distances equal
/// fiber-averaged l1 distances.
pub fn iota(h: &RandomDensity, driving: &DrivingSystem) -> Result<DVector<f64>> {
    let Some(points) = driving.points() else {
        return Err(Error::Unsupported(
            "the flat embedding needs a finite base".into(),
        ));
    };
    let n = points.len();
    let d = h.dim();
    let index = FlatIndex::new(n, d)?;
    let mut v = DVector::zeros(index.len());
    for (w, p) in points.iter().enumerate() {
        let f = h.get(*p)?;
        for i in 0..d {
            v[index.flat(w, i)] = f.masses()[i] / n as f64;
        }
    }
    Ok(v)
}

/// Read a flat vector back as one density per fiber. Returns the fiber
/// densities (each renormalized to unit mass) and the raw fiber masses
/// before normalization; for the image of `iota` every raw mass is `1/n`.
pub fn iota_inv(v: &DVector<f64>, index: &FlatIndex) -> Result<(RandomDensity, Vec<f64>)> {
    if v.len() != index.len() {
        return Err(Error::DimensionMismatch(format!(
            "flat vector of length {} vs index length {}",
            v.len(),
            index.len()
        )));
    }
    let d = index.dim();
    let weights = crate::density::Weights::uniform(d)?;
    let mut fibers = Vec::with_capacity(index.n_fibers());
    let mut masses = Vec::with_capacity(index.n_fibers());
    for w in 0..index.n_fibers() {
        let slice = DVector::from_fn(d, |i, _| v[index.flat(w, i)]);
        masses.push(slice.iter().sum());
        fibers.push((w as i64, Density::renormalized(slice, weights.clone())?));
    }
    Ok((RandomDensity::from_fibers(fibers)?, masses))
}

/// One fiberwise application of the cocycle to a family:
/// `(P h)(w) = G_{s^{-1} w} h_{s^{-1} w}` over all fibers of a cycle.
pub fn fiberwise_apply(c: &MarkovCocycle, h: &RandomDensity) -> Result<RandomDensity> {
    let points = c
        .driving()
        .points()
        .ok_or_else(|| Error::Unsupported("fiberwise application needs a finite base".into()))?;
    let mut out = Vec::with_capacity(points.len());
    for &p in &points {
        let prev = c.driving().step_inv(p)?;
        out.push((p, c.operator_at(prev)?.apply(h.get(prev)?)?));
    }
    RandomDensity::from_fibers(out)
}

/// Largest flat-space mismatch `|| ι(P h) - L ι(h) ||_1` over random fiber
/// families: the lift acts on flat vectors exactly as the cocycle acts
/// fiberwise.
pub fn lift_commutation_residual<R: Rng>(
    c: &MarkovCocycle,
    lift: &LiftMatrix,
    trials: usize,
    rng: &mut R,
) -> Result<f64> {
    let points = c
        .driving()
        .points()
        .ok_or_else(|| Error::Unsupported("commutation check needs a finite base".into()))?;
    let mut worst = 0.0_f64;
    for _ in 0..trials.max(1) {
        let h = RandomDensity::from_fibers(
            points
                .iter()
                .map(|&p| Ok((p, Density::random(c.dim(), rng)?)))
                .collect::<Result<Vec<_>>>()?,
        )?;
        let lhs = iota(&fiberwise_apply(c, &h)?, c.driving())?;
        let rhs = lift.matrix().apply_vec(&iota(&h, c.driving())?);
        let dist: f64 = (lhs - rhs).iter().map(|x| x.abs()).sum();
        worst = worst.max(dist);
    }
    Ok(worst)
}

/// Result of iterating the adjoint on the indicator of a support set.
#[derive(Debug, Clone)]
pub struct SupportSweep {
    /// Coordinates in the starting support.
    pub support_size: usize,
    /// Whether the support was already everything (the sweep then stays at
    /// the constant function 1 and carries no information).
    pub trivial: bool,
    /// Whether every coordinate was nondecreasing at every step, within
    /// `1e-12`.
    pub monotone: bool,
    /// Whether the sweep reached the constant function 1 within tolerance.
    pub reached_one: bool,
    /// Whether the smallest coordinate stopped moving well short of 1 (the
    /// sweep provably stalled rather than running out of budget).
    pub stalled: bool,
    /// Smallest coordinate at the final step.
    pub min_final: f64,
    pub steps: usize,
}

/// Iterate `s -> L^T s` from the indicator of `{h > SUPPORT_TOL}` until the
/// minimum coordinate reaches `1 - tol` or `max_steps` runs out. For an
/// exactly invariant `h` the support is absorbing, so the sweep is
/// pointwise nondecreasing; monotonicity is asserted up to `1e-12` per step
/// to absorb the fixed point's own residual.
pub fn adjoint_support_sweep(
    lift: &LiftMatrix,
    h_flat: &DVector<f64>,
    tol: f64,
    max_steps: usize,
) -> Result<SupportSweep> {
    if h_flat.len() != lift.index().len() {
        return Err(Error::DimensionMismatch(
            "support sweep: vector/lift size mismatch".into(),
        ));
    }
    let mut s = DVector::from_fn(h_flat.len(), |k, _| {
        if h_flat[k] > SUPPORT_TOL {
            1.0
        } else {
            0.0
        }
    });
    let support_size = s.iter().filter(|&&x| x == 1.0).count();
    if support_size == 0 {
        return Err(Error::InvalidArgument(
            "support sweep: the candidate density has empty support".into(),
        ));
    }
    let trivial = support_size == s.len();
    let mut monotone = true;
    let mut steps = 0;
    let mut min_final = s.min();
    let mut stall_run = 0usize;
    let mut stalled = false;
    for _ in 0..max_steps {
        if min_final >= 1.0 - tol {
            break;
        }
        let next = lift.matrix().adjoint_apply(&s)?;
        if next.iter().zip(s.iter()).any(|(a, b)| *a < b - 1e-12) {
            monotone = false;
        }
        s = next;
        steps += 1;
        let min_next = s.min();
        if min_next - min_final < 1e-15 {
            stall_run += 1;
        } else {
            stall_run = 0;
        }
        min_final = min_next;
        if stall_run >= 16 {
            stalled = true;
            break;
        }
    }
    Ok(SupportSweep {
        support_size,
        trivial,
        monotone,
        reached_one: min_final >= 1.0 - tol,
        stalled,
        min_final,
        steps,
    })
}

/// Operator-average convergence certificate for the lift.
#[derive(Debug, Clone)]
pub struct MeanErgodicCertificate {
    /// `||L P - P||` (matrix route) or the largest probe residual
    /// `||L v - v||_1` (probe route).
    pub defect: f64,
    /// `||P P - P||` for the matrix route; 0 for probes.
    pub idempotency_defect: f64,
    pub steps: usize,
    pub converged: bool,
    /// Whether the certificate used vector probes instead of the full
    /// projector.
    pub via_probes: bool,
    pub probe_count: usize,
    /// Whether the dimension was too large for any certificate.
    pub skipped: bool,
}

/// Certify that the operator averages of the lift converge: below
/// [`PROJECTOR_DIM_CAP`] by iterating `V -> (V + L V)/2` from the identity
/// (the defect `||L P - P||` bounds the distance of the averages from their
/// limit), above it by running the averaged iteration on a few probe
/// vectors.
pub fn mean_ergodic_certificate(
    lift: &LiftMatrix,
    tol: f64,
    max_steps: usize,
) -> Result<MeanErgodicCertificate> {
    let len = lift.index().len();
    if len <= PROJECTOR_DIM_CAP {
        let out = averaged_projector(lift.matrix().as_matrix(), tol, max_steps)?;
        return Ok(MeanErgodicCertificate {
            defect: out.defect,
            idempotency_defect: out.idempotency_defect,
            steps: out.steps,
            converged: out.converged,
            via_probes: false,
            probe_count: 0,
            skipped: false,
        });
    }
    if len > PROBE_DIM_CAP {
        return Ok(MeanErgodicCertificate {
            defect: f64::INFINITY,
            idempotency_defect: 0.0,
            steps: 0,
            converged: false,
            via_probes: true,
            probe_count: 0,
            skipped: true,
        });
    }
    let m = lift.matrix().as_matrix();
    let probes = [
        DVector::from_element(len, 1.0 / len as f64),
        DVector::from_fn(len, |k, _| if k == 0 { 1.0 } else { 0.0 }),
        DVector::from_fn(len, |k, _| if k == len / 2 { 1.0 } else { 0.0 }),
        DVector::from_fn(len, |k, _| (k + 1) as f64 / (len * len) as f64),
    ];
    let cap = max_steps.min(5_000);
    let mut defect = 0.0_f64;
    let mut steps = 0;
    let mut converged = true;
    for p in &probes {
        let out = averaged_fixed_point(
            |v, image| gemv_into(m, v.as_slice(), image.as_mut_slice()),
            p,
            tol,
            cap,
        )?;
        defect = defect.max(out.residual);
        steps = steps.max(out.steps);
        converged &= out.converged;
    }
    Ok(MeanErgodicCertificate {
        defect,
        idempotency_defect: 0.0,
        steps,
        converged,
        via_probes: true,
        probe_count: probes.len(),
        skipped: false,
    })
}

/// Everything the lift says about one cocycle: its fixed point, the fiber
/// family it encodes, and the operator-level certificates.
#[derive(Debug, Clone)]
pub struct LiftReport {
    pub n_fibers: usize,
    pub dim: usize,
    /// Unit-mass fixed point of the lift in flat coordinates.
    pub fixed_point_flat: DVector<f64>,
    /// `||L v - v||_1` of the returned fixed point.
    pub fixed_residual: f64,
    /// Steps of the averaging evidence stream.
    pub cesaro_steps: usize,
    pub cesaro_converged: bool,
    pub cesaro_certificate: f64,
    pub cesaro_mode: Option<CesaroMode>,
    /// Half-step polish iterations after the averaging stage.
    pub polish_steps: usize,
    /// The fixed point read back as one density per fiber.
    pub fixed_point: RandomDensity,
    /// Raw fiber masses of the fixed point; an invariant family carries
    /// exactly `1/n` per fiber.
    pub fiber_masses: Vec<f64>,
    pub fiber_mass_deviation: f64,
    /// One-step defect of the fiber family under the cocycle.
    pub equivariance: f64,
    pub mean_ergodic: MeanErgodicCertificate,
    pub support_sweep: SupportSweep,
}

/// Compute the lift's fixed point (averaging evidence first, half-step
/// polish after) and run the operator-level certificates.
pub fn lift_consistency_report(
    c: &MarkovCocycle,
    tol: f64,
    max_steps: usize,
) -> Result<LiftReport> {
    let lift = build_lift(c)?;
    let index = *lift.index();
    let len = index.len();
    let m = lift.matrix().as_matrix();

    // averaging evidence: iterate the lift from the uniform family and let
    // the estimator certify settling of iterates or averages
    let mut est = CesaroEstimator::new(len, tol)?;
    let mut u = DVector::from_element(len, 1.0 / len as f64);
    let mut scratch = DVector::zeros(len);
    est.push(&u)?;
    while !est.is_converged() && est.steps() < max_steps {
        gemv_into(m, u.as_slice(), scratch.as_mut_slice());
        std::mem::swap(&mut u, &mut scratch);
        est.push(&u)?;
    }
    let evidence = est.outcome();

    // half-step polish turns the estimate into a fixed point with a
    // residual at the strict identity scale
    let polish_tol = tol.min(1e-12);
    let polished = averaged_fixed_point(
        |v, image| gemv_into(m, v.as_slice(), image.as_mut_slice()),
        &evidence.limit,
        polish_tol,
        max_steps,
    )?;
    let mut fixed = polished.point;
    let total: f64 = fixed.iter().sum();
    if !(total > 0.0) {
        return Err(Error::NotDensity(format!(
            "lift fixed point has total mass {total}"
        )));
    }
    fixed /= total;
    let mut image = DVector::zeros(len);
    gemv_into(m, fixed.as_slice(), image.as_mut_slice());
    let fixed_residual: f64 = (&image - &fixed).iter().map(|x| x.abs()).sum();

    let (fixed_point, fiber_masses) = iota_inv(&fixed, &index)?;
    let share = 1.0 / index.n_fibers() as f64;
    let fiber_mass_deviation = fiber_masses
        .iter()
        .map(|&x| (x - share).abs())
        .fold(0.0, f64::max);
    let equivariance = crate::markov::equivariance_residual(c, &fixed_point)?;

    let mean_ergodic = mean_ergodic_certificate(&lift, tol, max_steps)?;
    let support_sweep = adjoint_support_sweep(&lift, &fixed, tol, max_steps.max(64))?;

    Ok(LiftReport {
        n_fibers: index.n_fibers(),
        dim: index.dim(),
        fixed_point_flat: fixed,
        fixed_residual,
        cesaro_steps: evidence.steps,
        cesaro_converged: evidence.converged,
        cesaro_certificate: evidence.certificate,
        cesaro_mode: evidence.mode,
        polish_steps: polished.steps,
        fixed_point,
        fiber_masses,
        fiber_mass_deviation,
        equivariance,
        mean_ergodic,
        support_sweep,
    })
}

/// Project the skew product `(w, x) -> (s w, T_w x)` of a map family over a
/// finite cycle onto the product partition: product cell `(w, i)` sends its
/// mass into fiber `s w` exactly as cell `i` moves under `T_w`.
pub fn skew_product_ulam(
    family: &RandomMapFamily,
    partition: &Partition,
    opts: &UlamOptions,
) -> Result<(MarkovMatrix, FlatIndex)> {
    let DrivingSystem::FiniteCycle { n } = family.driving() else {
        return Err(Error::Unsupported(
            "the skew-product projection needs a finite cycle".into(),
        ));
    };
    let n = *n;
    let d = partition.len();
    let index = FlatIndex::new(n, d)?;
    let mut m = DMatrix::<f64>::zeros(index.len(), index.len());
    for w in 0..n {
        let fiber_map = family.map_at(w as i64)?;
        let u = ulam_matrix(fiber_map, partition, opts)?;
        let target = (w + 1) % n;
        for i in 0..d {
            for j in 0..d {
                let mass = u.get(j, i);
                if mass != 0.0 {
                    m[(index.flat(target, j), index.flat(w, i))] = mass;
                }
            }
        }
    }
    Ok((MarkovMatrix::new(m)?, index))
}

/// Largest entrywise difference between the skew-product projection and the
/// lift of the family's matrix cocycle. The two go through different
/// assemblies of the same fiber data, so any indexing drift between the
/// product dynamics and the lift convention shows up here.
pub fn skew_ulam_equivalence(
    family: &RandomMapFamily,
    partition: &Partition,
    opts: &UlamOptions,
) -> Result<f64> {
    let (skew, _) = skew_product_ulam(family, partition, opts)?;
    let cocycle = crate::transfer::family::ulam_cocycle(family, partition, opts)?;
    let lift = build_lift(&cocycle)?;
    Ok(crate::linalg::entrywise_max_distance(
        skew.as_matrix(),
        lift.matrix().as_matrix(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{period2, period2_invariant};
    use crate::transfer::map::PiecewiseMap;

    #[test]
    fn lift_blocks_sit_under_the_cycle() {
        // for the 2-cycle the lift is [[0, G1], [G0, 0]]
        let c = period2();
        let lift = build_lift(&c).unwrap();
        assert_eq!(lift.index().len(), 4);
        let g0 = c.generator(0).unwrap().as_matrix().clone();
        let g1 = c.generator(1).unwrap().as_matrix().clone();
        assert_eq!(lift.block(1, 0), g0);
        assert_eq!(lift.block(0, 1), g1);
        assert_eq!(lift.block(0, 0), DMatrix::zeros(2, 2));
        assert_eq!(lift.block(1, 1), DMatrix::zeros(2, 2));
    }

    #[test]
    fn embedding_is_an_isometry_with_unit_mass() {
        let (h0, h1) = period2_invariant();
        let g0 = Density::from_masses(&[0.5, 0.5]).unwrap();
        let g1 = Density::from_masses(&[0.1, 0.9]).unwrap();
        let driving = DrivingSystem::cycle(2).unwrap();
        let h = RandomDensity::for_cycle(vec![h0.clone(), h1.clone()]).unwrap();
        let g = RandomDensity::for_cycle(vec![g0.clone(), g1.clone()]).unwrap();
        let vh = iota(&h, &driving).unwrap();
        let vg = iota(&g, &driving).unwrap();
        assert!((vh.iter().sum::<f64>() - 1.0).abs() <= 1e-15);
        // flat l1 distance = fiber-averaged l1 distance
        let flat: f64 = (&vh - &vg).iter().map(|x| x.abs()).sum();
        let averaged = 0.5 * (h0.l1_distance(&g0) + h1.l1_distance(&g1));
        assert!((flat - averaged).abs() <= 1e-15);
    }

    #[test]
    fn embedding_round_trips() {
        let (h0, h1) = period2_invariant();
        let h = RandomDensity::for_cycle(vec![h0, h1]).unwrap();
        let v = iota(&h, &DrivingSystem::cycle(2).unwrap()).unwrap();
        let index = FlatIndex::new(2, 2).unwrap();
        let (back, masses) = iota_inv(&v, &index).unwrap();
        for (w, mass) in masses.iter().enumerate() {
            assert!((mass - 0.5).abs() <= 1e-15);
            let a = back.get(w as i64).unwrap();
            let b = h.get(w as i64).unwrap();
            assert!(a.l1_distance(b) <= 1e-14);
        }
    }

    #[test]
    fn lift_acts_as_the_cocycle_acts_fiberwise() {
        use rand::SeedableRng;
        let c = period2();
        let lift = build_lift(&c).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let worst = lift_commutation_residual(&c, &lift, 20, &mut rng).unwrap();
        assert!(worst <= 1e-12, "commutation residual {worst}");
    }

    #[test]
    fn fixed_point_recovers_the_invariant_pair() {
        let c = period2();
        let report = lift_consistency_report(&c, 1e-10, 200_000).unwrap();
        assert!(report.cesaro_converged);
        assert!(report.fixed_residual <= 1e-12, "{}", report.fixed_residual);
        assert!(report.fiber_mass_deviation <= 1e-12);
        assert!(report.equivariance <= 1e-10);
        let (h0, h1) = period2_invariant();
        let got0 = report.fixed_point.get(0).unwrap();
        let got1 = report.fixed_point.get(1).unwrap();
        assert!(got0.l1_distance(&h0) <= 1e-10, "{}", got0.l1_distance(&h0));
        assert!(got1.l1_distance(&h1) <= 1e-10);
        // strictly positive pair: the sweep has nothing to do
        assert!(report.support_sweep.trivial);
        assert!(report.support_sweep.monotone);
        assert!(report.support_sweep.reached_one);
        // the lift of a positive 2-cycle is mean ergodic with a clean
        // projector certificate
        assert!(report.mean_ergodic.converged);
        assert!(!report.mean_ergodic.via_probes);
        assert!(report.mean_ergodic.defect <= 1e-10);
        assert!(report.mean_ergodic.idempotency_defect <= 1e-8);
    }

    #[test]
    fn permutation_cocycle_converges_through_averages() {
        // both generators flip the two cells; plain iteration of the lift
        // oscillates forever, so the average-gap certificate must fire and
        // the polish must still land on a genuine fixed point
        let flip = MarkovMatrix::permutation(&[1, 0]).unwrap();
        let c = MarkovCocycle::new(
            vec![flip.clone(), flip],
            DrivingSystem::cycle(2).unwrap(),
        )
        .unwrap();
        let report = lift_consistency_report(&c, 1e-9, 500_000).unwrap();
        assert!(report.cesaro_converged);
        assert_eq!(report.cesaro_mode, Some(CesaroMode::AverageGap));
        assert!(report.fixed_residual <= 1e-12);
        assert!(report.equivariance <= 1e-12);
        // the fixed family of the flip pair is uniform on both fibers
        for w in 0..2 {
            let f = report.fixed_point.get(w).unwrap();
            assert!((f.masses()[0] - 0.5).abs() <= 1e-9);
            assert!((f.masses()[1] - 0.5).abs() <= 1e-9);
        }
        assert!(report.mean_ergodic.converged);
    }

    #[test]
    fn probe_certificate_covers_large_lifts() {
        use rand::SeedableRng;
        // 5-cycle at dimension 60 gives a flat length of 300, beyond the
        // projector cap
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        let c = MarkovCocycle::random(60, DrivingSystem::cycle(5).unwrap(), &mut rng).unwrap();
        let lift = build_lift(&c).unwrap();
        let cert = mean_ergodic_certificate(&lift, 1e-9, 100_000).unwrap();
        assert!(cert.via_probes);
        assert!(!cert.skipped);
        assert!(cert.converged, "probe defect {}", cert.defect);
    }

    #[test]
    fn support_sweep_reaches_one_from_a_partial_support() {
        // one-cycle chain: cell 1 leaks into cell 0, the fixed density is
        // the point mass on cell 0, and the sweep fills in after one step
        let m = MarkovMatrix::from_rows(&[&[1.0, 0.5], &[0.0, 0.5]]).unwrap();
        let c = MarkovCocycle::constant(m);
        let lift = build_lift(&c).unwrap();
        let h = DVector::from_row_slice(&[1.0, 0.0]);
        let sweep = adjoint_support_sweep(&lift, &h, 1e-9, 1000).unwrap();
        assert_eq!(sweep.support_size, 1);
        assert!(!sweep.trivial);
        assert!(sweep.monotone);
        assert!(sweep.reached_one);
        assert!(!sweep.stalled);
        assert!(sweep.min_final >= 1.0 - 1e-9);
    }

    #[test]
    fn support_sweep_detects_unreachable_mass() {
        // two disconnected cells: the sweep from cell 0 never reaches cell 1
        let m = MarkovMatrix::identity(2).unwrap();
        let c = MarkovCocycle::constant(m);
        let lift = build_lift(&c).unwrap();
        let h = DVector::from_row_slice(&[1.0, 0.0]);
        let sweep = adjoint_support_sweep(&lift, &h, 1e-9, 200).unwrap();
        assert!(!sweep.reached_one);
        assert!(sweep.stalled);
        assert_eq!(sweep.min_final, 0.0);
    }

    #[test]
    fn skew_projection_equals_the_lift_of_the_fiber_cocycle() {
        let family = RandomMapFamily::new(
            vec![PiecewiseMap::doubling(), PiecewiseMap::tripling()],
            DrivingSystem::cycle(2).unwrap(),
        )
        .unwrap();
        for d in [4usize, 6, 12] {
            let part = Partition::new(d).unwrap();
            let dev = skew_ulam_equivalence(&family, &part, &UlamOptions::default()).unwrap();
            assert_eq!(dev, 0.0, "d={d}");
        }
    }

    #[test]
    fn skew_projection_matches_orbit_sampling() {
        // empirical oracle: push a cloud of points through one step of
        // (w, x) -> (s w, T_w x) and compare occupation fractions with the
        // matrix column
        let family = RandomMapFamily::new(
            vec![PiecewiseMap::doubling(), PiecewiseMap::tripling()],
            DrivingSystem::cycle(2).unwrap(),
        )
        .unwrap();
        let d = 6;
        let part = Partition::new(d).unwrap();
        let (skew, index) = skew_product_ulam(&family, &part, &UlamOptions::default()).unwrap();
        let samples = 600;
        for w in 0..2usize {
            let map = family.map_at(w as i64).unwrap();
            for i in 0..d {
                let (lo, hi) = part.cell(i);
                let mut counts = vec![0.0; index.len()];
                for s in 0..samples {
                    let x = lo + (s as f64 + 0.5) * (hi - lo) / samples as f64;
                    let y = map.eval(x).unwrap();
                    counts[index.flat((w + 1) % 2, part.cell_index(y))] += 1.0 / samples as f64;
                }
                let col = index.flat(w, i);
                for (k, count) in counts.iter().enumerate() {
                    assert!(
                        (count - skew.get(k, col)).abs() <= 1e-2,
                        "cell ({w}, {i}) -> {k}"
                    );
                }
            }
        }
    }

    #[test]
    fn lift_rejects_path_driving() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let driving = DrivingSystem::bernoulli(vec![0.5, 0.5], 3).unwrap();
        let c = MarkovCocycle::random(2, driving, &mut rng).unwrap();
        assert!(matches!(build_lift(&c), Err(Error::Unsupported(_))));
    }
}
