//! Markov operators on a partitioned interval and their environment-indexed
//! compositions.
//!
//! In mass coordinates a Markov operator is a column-stochastic matrix `M`:
//! column `i` says how the mass of cell `i` is redistributed, so `M` maps
//! densities to densities and preserves total mass. A [`MarkovCocycle`] is a
//! finite table of such matrices indexed by environment labels together with
//! a [`DrivingSystem`]; composing generators along a base orbit gives the
//! driven `n`-step operators
//!
//! ```text
//!   forward:   P(n, w) = P(s^{n-1} w) .. P(s w) P(w)
//!   pullback:  P(n, s^{-n} w) = P(s^{-1} w) .. P(s^{-n} w)
//! ```
//!
//! The pullback composition ends at the fiber over `w` no matter how large
//! `n` is, which is what makes its iterates comparable and is the form used
//! throughout the invariant-density machinery.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::density::Density;
use crate::driving::{DrivingSystem, Point};
use crate::error::{Error, Result};

/// Tolerance for the column-sum validation.
pub const STOCHASTIC_TOL: f64 = 1e-12;

/// A column-stochastic matrix acting on densities in mass coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovMatrix {
    m: DMatrix<f64>,
}

impl MarkovMatrix {
    /// Validate entries and column sums.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "expected a nonempty square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(Error::NotStochastic(
                "entries must be finite and nonnegative".into(),
            ));
        }
        for (j, col) in m.column_iter().enumerate() {
            let s: f64 = col.iter().sum();
            if (s - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::NotStochastic(format!("column {j} sums to {s}")));
            }
        }
        Ok(MarkovMatrix { m })
    }

    /// Build from rows written out the way matrices are usually displayed.
    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        let m = DMatrix::from_fn(d, d, |i, j| rows[i][j]);
        MarkovMatrix::new(m)
    }

    pub fn identity(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::DimensionMismatch("dimension must be >= 1".into()));
        }
        Ok(MarkovMatrix {
            m: DMatrix::identity(d, d),
        })
    }

    /// Permutation matrix: cell `i` sends its mass to `perm[i]`.
    pub fn permutation(perm: &[usize]) -> Result<Self> {
        let d = perm.len();
        let mut seen = vec![false; d];
        for &t in perm {
            if t >= d || seen[t] {
                return Err(Error::InvalidArgument("not a permutation".into()));
            }
            seen[t] = true;
        }
        let mut m = DMatrix::zeros(d, d);
        for (i, &t) in perm.iter().enumerate() {
            m[(t, i)] = 1.0;
        }
        Ok(MarkovMatrix { m })
    }

    /// Random column-stochastic matrix with strictly positive entries.
    pub fn random<R: Rng>(d: usize, rng: &mut R) -> Result<Self> {
        if d == 0 {
            return Err(Error::DimensionMismatch("dimension must be >= 1".into()));
        }
        let mut m = DMatrix::from_fn(d, d, |_, _| rng.gen_range(0.05..1.0_f64));
        for mut col in m.column_iter_mut() {
            let s: f64 = col.iter().sum();
            col /= s;
        }
        MarkovMatrix::new(m)
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.m[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    /// Act on a density: `f -> M f`.
    pub fn apply(&self, f: &Density) -> Result<Density> {
        if f.dim() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "matrix dim {} vs density dim {}",
                self.dim(),
                f.dim()
            )));
        }
        let masses = &self.m * f.masses();
        // products and sums of nonnegative values stay nonnegative, and the
        // column sums preserve total mass up to rounding
        Density::renormalized(masses, f.weights().clone())
    }

    /// Act on a raw mass vector without density validation.
    pub fn apply_vec(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.m * v
    }

    /// Adjoint action on observables: `g -> M^T g`, so that
    /// `<M f, g> = <f, M^T g>` with `<f, g> = sum_i mass_i g_i`.
    pub fn adjoint_apply(&self, g: &DVector<f64>) -> Result<DVector<f64>> {
        if g.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "matrix dim {} vs observable dim {}",
                self.dim(),
                g.len()
            )));
        }
        Ok(self.m.transpose() * g)
    }
}

/// Pairing of a density with an observable: `sum_i mass_i g_i`.
pub fn pair(f: &Density, g: &DVector<f64>) -> Result<f64> {
    if f.dim() != g.len() {
        return Err(Error::DimensionMismatch(
            "density/observable length mismatch".into(),
        ));
    }
    Ok(f.masses().dot(g))
}

/// An environment-indexed family of Markov operators over a driving system.
#[derive(Debug, Clone)]
pub struct MarkovCocycle {
    generators: Vec<MarkovMatrix>,
    driving: DrivingSystem,
}

impl MarkovCocycle {
    /// Validate that the generator table covers the driving system's label
    /// alphabet and that all generators share one dimension.
    pub fn new(generators: Vec<MarkovMatrix>, driving: DrivingSystem) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::InvalidArgument("no generators".into()));
        }
        if generators.len() != driving.alphabet_size() {
            return Err(Error::DimensionMismatch(format!(
                "driving system needs {} generators, table has {}",
                driving.alphabet_size(),
                generators.len()
            )));
        }
        let d = generators[0].dim();
        if generators.iter().any(|g| g.dim() != d) {
            return Err(Error::DimensionMismatch(
                "generators have mixed dimensions".into(),
            ));
        }
        Ok(MarkovCocycle {
            generators,
            driving,
        })
    }

    /// A constant (environment-independent) cocycle over a 1-cycle.
    pub fn constant(m: MarkovMatrix) -> Self {
        MarkovCocycle {
            generators: vec![m],
            driving: DrivingSystem::FiniteCycle { n: 1 },
        }
    }

    /// Random cocycle with positive generators.
    pub fn random<R: Rng>(d: usize, driving: DrivingSystem, rng: &mut R) -> Result<Self> {
        let table = (0..driving.alphabet_size())
            .map(|_| MarkovMatrix::random(d, rng))
            .collect::<Result<Vec<_>>>()?;
        MarkovCocycle::new(table, driving)
    }

    pub fn dim(&self) -> usize {
        self.generators[0].dim()
    }

    pub fn driving(&self) -> &DrivingSystem {
        &self.driving
    }

    pub fn generators(&self) -> &[MarkovMatrix] {
        &self.generators
    }

    pub fn generator(&self, label: usize) -> Result<&MarkovMatrix> {
        self.generators
            .get(label)
            .ok_or_else(|| Error::OutOfRange(format!("generator label {label}")))
    }

    /// The operator acting at base point `w`.
    pub fn operator_at(&self, w: Point) -> Result<&MarkovMatrix> {
        self.generator(self.driving.label(w)?)
    }

    /// One step: apply the operator at `w`.
    pub fn apply(&self, w: Point, f: &Density) -> Result<Density> {
        self.operator_at(w)?.apply(f)
    }

    /// Forward `n`-step composition starting at `w`:
    /// `P(s^{n-1} w) .. P(w) f`.
    pub fn compose_forward(&self, w: Point, n: usize, f: &Density) -> Result<Density> {
        self.check_dim(f)?;
        let mut u = f.masses().clone();
        let mut p = w;
        for _ in 0..n {
            u = self.operator_at(p)?.apply_vec(&u);
            p = self.driving.step(p)?;
        }
        Density::renormalized(u, f.weights().clone())
    }

    /// Pullback `n`-step composition ending at `w`:
    /// `P(s^{-1} w) .. P(s^{-n} w) f`.
    pub fn compose_pullback(&self, w: Point, n: usize, f: &Density) -> Result<Density> {
        self.check_dim(f)?;
        let labels = self.driving.past_labels(w, n)?;
        let mut u = f.masses().clone();
        for &l in labels.iter().rev() {
            u = self.generators[l].apply_vec(&u);
        }
        Density::renormalized(u, f.weights().clone())
    }

    fn check_dim(&self, f: &Density) -> Result<()> {
        if f.dim() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "cocycle dim {} vs density dim {}",
                self.dim(),
                f.dim()
            )));
        }
        Ok(())
    }
}

/// A density attached to each tracked fiber of the base space.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomDensity {
    fibers: BTreeMap<Point, Density>,
}

impl RandomDensity {
    pub fn from_fibers(fibers: impl IntoIterator<Item = (Point, Density)>) -> Result<Self> {
        let fibers: BTreeMap<Point, Density> = fibers.into_iter().collect();
        if fibers.is_empty() {
            return Err(Error::InvalidArgument("no fibers".into()));
        }
        let d = fibers.values().next().map(|f| f.dim()).unwrap_or(0);
        if fibers.values().any(|f| f.dim() != d) {
            return Err(Error::DimensionMismatch(
                "fiber densities have mixed dimensions".into(),
            ));
        }
        Ok(RandomDensity { fibers })
    }

    /// One density per point of a cycle, in order.
    pub fn for_cycle(densities: Vec<Density>) -> Result<Self> {
        RandomDensity::from_fibers(
            densities
                .into_iter()
                .enumerate()
                .map(|(i, f)| (i as Point, f)),
        )
    }

    pub fn get(&self, w: Point) -> Result<&Density> {
        self.fibers
            .get(&w)
            .ok_or_else(|| Error::MissingFiber(format!("fiber {w}")))
    }

    pub fn fibers(&self) -> impl Iterator<Item = (&Point, &Density)> {
        self.fibers.iter()
    }

    pub fn len(&self) -> usize {
        self.fibers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fibers.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.fibers.values().next().map(|f| f.dim()).unwrap_or(0)
    }
}

/// Largest one-step defect `|| P(w) h_w - h_{s w} ||_1` over the tracked
/// fibers. Zero exactly when the family is invariant under the cocycle.
///
/// For a finite cycle every fiber must be present. For path driving the
/// residual runs over the tracked fibers whose successor is also tracked, and
/// it is an error if there are none.
pub fn equivariance_residual(c: &MarkovCocycle, h: &RandomDensity) -> Result<f64> {
    if h.dim() != c.dim() {
        return Err(Error::DimensionMismatch(
            "cocycle/fiber table dimension mismatch".into(),
        ));
    }
    if let Some(points) = c.driving().points() {
        for p in &points {
            h.get(*p)?;
        }
    }
    let mut worst: Option<f64> = None;
    for (&w, f) in h.fibers() {
        let succ = c.driving().step(w)?;
        let Ok(g) = h.get(succ) else {
            continue;
        };
        let image = c.operator_at(w)?.apply_vec(f.masses());
        let r = (&image - g.masses()).iter().map(|x| x.abs()).sum();
        worst = Some(worst.map_or(r, |w0: f64| w0.max(r)));
    }
    worst.ok_or_else(|| Error::MissingFiber("no fiber has a tracked successor".into()))
}

/// Uniform fiber weights for global (fiber-averaged) norms over a finite
/// cycle or a sampled window of `k` fibers.
pub fn fiber_average<'a>(values: impl Iterator<Item = &'a f64>) -> f64 {
    let mut sum = 0.0;
    let mut count = 0usize;
    for v in values {
        sum += v;
        count += 1;
    }
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{period2, period2_invariant};

    /// Independent stationary-vector oracle: plain power iteration.
    fn power_iteration_oracle(m: &DMatrix<f64>, steps: usize) -> DVector<f64> {
        let d = m.nrows();
        let mut v = DVector::from_element(d, 1.0 / d as f64);
        for _ in 0..steps {
            v = m * v;
        }
        v
    }

    #[test]
    fn constructor_rejects_bad_matrices() {
        // negative entry
        assert!(MarkovMatrix::from_rows(&[&[1.1, 0.0], &[-0.1, 1.0]]).is_err());
        // column sum != 1
        assert!(MarkovMatrix::from_rows(&[&[0.5, 0.5], &[0.4, 0.5]]).is_err());
        // non-square
        assert!(MarkovMatrix::new(DMatrix::from_row_slice(1, 2, &[0.5, 0.5])).is_err());
    }

    #[test]
    fn apply_identity_fixes_densities() {
        let m = MarkovMatrix::identity(3).unwrap();
        let f = Density::from_masses(&[0.2, 0.3, 0.5]).unwrap();
        assert_eq!(m.apply(&f).unwrap(), f);
    }

    #[test]
    fn apply_permutation_moves_mass() {
        let m = MarkovMatrix::permutation(&[1, 0]).unwrap();
        let f = Density::from_masses(&[0.3, 0.7]).unwrap();
        let g = m.apply(&f).unwrap();
        assert_eq!(g.masses().as_slice(), &[0.7, 0.3]);
    }

    #[test]
    fn apply_fixes_the_stationary_vector() {
        // stationary vector of [[0.9, 0.5], [0.1, 0.5]] is [5/6, 1/6]:
        // first confirm with an independent power-iteration oracle, then
        // check the library's action fixes it.
        let rows = [[0.9, 0.5], [0.1, 0.5]];
        let m = MarkovMatrix::from_rows(&[&rows[0], &rows[1]]).unwrap();
        let oracle = power_iteration_oracle(m.as_matrix(), 200);
        assert!((oracle[0] - 5.0 / 6.0).abs() < 1e-12);
        assert!((oracle[1] - 1.0 / 6.0).abs() < 1e-12);

        let f = Density::from_masses(&[5.0 / 6.0, 1.0 / 6.0]).unwrap();
        let g = m.apply(&f).unwrap();
        assert!(g.l1_distance(&f) < 1e-15);
    }

    #[test]
    fn apply_conserves_mass_and_positivity() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let m = MarkovMatrix::random(5, &mut rng).unwrap();
            let f = Density::random(5, &mut rng).unwrap();
            let g = m.apply(&f).unwrap();
            let sum: f64 = g.masses().iter().sum();
            assert!((sum - 1.0).abs() < 1e-12);
            assert!(g.masses().iter().all(|&x| x >= 0.0));
        }
    }

    #[test]
    fn compose_forward_zero_steps_is_identity() {
        let c = period2();
        let f = Density::from_masses(&[1.0, 0.0]).unwrap();
        assert_eq!(c.compose_forward(0, 0, &f).unwrap(), f);
    }

    #[test]
    fn compose_forward_two_steps_from_fiber_zero() {
        // P1 P0 [1, 0] = first column of P1 P0 = [0.55, 0.45], checked
        // against an explicit product oracle.
        let c = period2();
        let p0 = c.generator(0).unwrap().as_matrix().clone();
        let p1 = c.generator(1).unwrap().as_matrix().clone();
        let oracle = (&p1 * &p0) * DVector::from_row_slice(&[1.0, 0.0]);
        assert!((oracle[0] - 0.55).abs() < 1e-15);
        assert!((oracle[1] - 0.45).abs() < 1e-15);

        let f = Density::from_masses(&[1.0, 0.0]).unwrap();
        let g = c.compose_forward(0, 2, &f).unwrap();
        assert!((g.masses()[0] - 0.55).abs() < 1e-15);
        assert!((g.masses()[1] - 0.45).abs() < 1e-15);
    }

    #[test]
    fn compose_forward_on_constant_cocycle_is_a_power() {
        let m = MarkovMatrix::from_rows(&[&[0.9, 0.5], &[0.1, 0.5]]).unwrap();
        let c = MarkovCocycle::constant(m.clone());
        let f = Density::from_masses(&[0.25, 0.75]).unwrap();
        let got = c.compose_forward(0, 3, &f).unwrap();
        let a = m.as_matrix();
        let oracle = a * (a * (a * f.masses()));
        assert!((got.masses() - oracle).iter().all(|x| x.abs() < 1e-15));
    }

    #[test]
    fn compose_pullback_one_step_applies_the_previous_operator() {
        // pullback into fiber 0 applies the operator at fiber 1:
        // P1 [0.5, 0.5] = [0.55, 0.45]
        let c = period2();
        let f = Density::from_masses(&[0.5, 0.5]).unwrap();
        let g = c.compose_pullback(0, 1, &f).unwrap();
        assert!((g.masses()[0] - 0.55).abs() < 1e-15);
        assert!((g.masses()[1] - 0.45).abs() < 1e-15);
    }

    #[test]
    fn cocycle_law_holds_exactly() {
        // P(n+m, w) = P(n, s^m w) P(m, w). On raw mass vectors the two
        // sides perform literally the same chain of matrix-vector
        // products, so they agree bitwise.
        let c = period2();
        let f = DVector::from_row_slice(&[0.6, 0.4]);
        for w in 0..2i64 {
            for m in 0..4usize {
                for n in 0..4usize {
                    let mut whole = f.clone();
                    let mut p = w;
                    for _ in 0..(n + m) {
                        whole = c.operator_at(p).unwrap().apply_vec(&whole);
                        p = c.driving().step(p).unwrap();
                    }
                    let mut split = f.clone();
                    let mut p = w;
                    for _ in 0..m {
                        split = c.operator_at(p).unwrap().apply_vec(&split);
                        p = c.driving().step(p).unwrap();
                    }
                    for _ in 0..n {
                        split = c.operator_at(p).unwrap().apply_vec(&split);
                        p = c.driving().step(p).unwrap();
                    }
                    assert_eq!(whole, split);
                }
            }
        }
    }

    #[test]
    fn forward_composition_splits_up_to_renormalization() {
        // The Density wrapper renormalizes after every composition, so the
        // split route divides by an intermediate total once more than the
        // whole route; the results agree to rounding, not bitwise.
        let c = period2();
        let f = Density::from_masses(&[0.6, 0.4]).unwrap();
        for w in 0..2 {
            for m in 0..4usize {
                for n in 0..4usize {
                    let whole = c.compose_forward(w, n + m, &f).unwrap();
                    let part = c.compose_forward(w, m, &f).unwrap();
                    let wm = c.driving().step_by(w, m as i64).unwrap();
                    let split = c.compose_forward(wm, n, &part).unwrap();
                    assert!(whole.l1_distance(&split) <= 1e-14);
                }
            }
        }
    }

    #[test]
    fn adjoint_pairing_identity_on_a_worked_example() {
        // <P0 f, g> = <f, P0^T g> = 1.6 for f = [1/2, 1/2], g = [1, 2]
        let c = period2();
        let p0 = c.generator(0).unwrap();
        let f = Density::from_masses(&[0.5, 0.5]).unwrap();
        let g = DVector::from_row_slice(&[1.0, 2.0]);
        let lhs = pair(&p0.apply(&f).unwrap(), &g).unwrap();
        let rhs = pair(&f, &p0.adjoint_apply(&g).unwrap()).unwrap();
        assert!((lhs - 1.6).abs() < 1e-15);
        assert!((rhs - 1.6).abs() < 1e-15);
    }

    #[test]
    fn adjoint_fixes_constant_observables() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let m = MarkovMatrix::random(6, &mut rng).unwrap();
        let ones = DVector::from_element(6, 1.0);
        let back = m.adjoint_apply(&ones).unwrap();
        assert!((back - ones).iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn equivariance_residual_is_zero_for_the_exact_pair() {
        let c = period2();
        let (h0, h1) = period2_invariant();
        let h = RandomDensity::for_cycle(vec![h0, h1]).unwrap();
        assert!(equivariance_residual(&c, &h).unwrap() <= 1e-12);
    }

    #[test]
    fn equivariance_residual_of_the_uniform_family() {
        // worst one-step defect of the constant-uniform family:
        // ||P0 u - u||_1 = 0.2, ||P1 u - u||_1 = 0.1
        let c = period2();
        let u = Density::from_masses(&[0.5, 0.5]).unwrap();
        let h = RandomDensity::for_cycle(vec![u.clone(), u]).unwrap();
        let r = equivariance_residual(&c, &h).unwrap();
        assert!((r - 0.2).abs() < 1e-15);
    }

    #[test]
    fn equivariance_residual_requires_all_cycle_fibers() {
        let c = period2();
        let (h0, _) = period2_invariant();
        let h = RandomDensity::from_fibers([(0, h0)]).unwrap();
        assert!(matches!(
            equivariance_residual(&c, &h),
            Err(Error::MissingFiber(_))
        ));
    }

    #[test]
    fn cocycle_table_must_match_alphabet() {
        let p0 = MarkovMatrix::identity(2).unwrap();
        let err = MarkovCocycle::new(vec![p0], DrivingSystem::cycle(2).unwrap());
        assert!(matches!(err, Err(Error::DimensionMismatch(_))));
    }
}
