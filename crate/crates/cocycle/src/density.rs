//! Probability densities on a partitioned interval, stored in mass
//! coordinates.
//!
//! A [`Density`] keeps one number per cell: the mass the density assigns to
//! that cell with respect to the reference measure. Mass coordinates make
//! transfer matrices column-stochastic and make the L1 norm a plain absolute
//! sum; the pointwise density *value* on a cell is `mass / weight`.

use std::sync::Arc;

use nalgebra::DVector;
use rand::Rng;

use crate::error::{Error, Result};

/// Tolerance for the unit-mass check.
pub const MASS_TOL: f64 = 1e-12;

/// Reference cell weights: positive, summing to one. Shared by the densities
/// living on the same partition.
#[derive(Debug, Clone)]
pub struct Weights(Arc<DVector<f64>>);

impl Weights {
    /// Validate and wrap a weight vector.
    pub fn new(w: DVector<f64>) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::InvalidArgument("weights must be nonempty".into()));
        }
        if w.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
            return Err(Error::InvalidArgument(
                "weights must be finite and positive".into(),
            ));
        }
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidArgument(format!(
                "weights must sum to 1 (got {sum})"
            )));
        }
        Ok(Weights(Arc::new(w)))
    }

    /// `d` equal cells.
    pub fn uniform(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidArgument("dimension must be >= 1".into()));
        }
        Ok(Weights(Arc::new(DVector::from_element(d, 1.0 / d as f64))))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.0
    }
}

impl PartialEq for Weights {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

/// A probability density in mass coordinates: nonnegative cell masses that
/// sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct Density {
    masses: DVector<f64>,
    weights: Weights,
}

impl Density {
    /// Validate masses against the weights and build a density.
    pub fn new(masses: DVector<f64>, weights: Weights) -> Result<Self> {
        if masses.len() != weights.dim() {
            return Err(Error::DimensionMismatch(format!(
                "masses have {} cells, weights {}",
                masses.len(),
                weights.dim()
            )));
        }
        if masses.iter().any(|&m| !(m >= 0.0) || !m.is_finite()) {
            return Err(Error::NotDensity(
                "masses must be finite and nonnegative".into(),
            ));
        }
        let sum: f64 = masses.iter().sum();
        if (sum - 1.0).abs() > MASS_TOL {
            return Err(Error::NotDensity(format!(
                "masses must sum to 1 (got {sum})"
            )));
        }
        Ok(Density { masses, weights })
    }

    /// Density from masses on `d` equal cells.
    pub fn from_masses(masses: &[f64]) -> Result<Self> {
        let w = Weights::uniform(masses.len())?;
        Density::new(DVector::from_row_slice(masses), w)
    }

    /// The constant density 1 (mass proportional to the weights).
    pub fn uniform(weights: Weights) -> Self {
        Density {
            masses: weights.as_vector().clone(),
            weights,
        }
    }

    /// All mass on one cell.
    pub fn point_mass(cell: usize, weights: Weights) -> Result<Self> {
        if cell >= weights.dim() {
            return Err(Error::OutOfRange(format!(
                "cell {cell} out of {}",
                weights.dim()
            )));
        }
        let mut m = DVector::zeros(weights.dim());
        m[cell] = 1.0;
        Ok(Density { masses: m, weights })
    }

    /// Density from pointwise values (`mass = value * weight`), renormalized
    /// to unit mass.
    pub fn from_values(values: &DVector<f64>, weights: Weights) -> Result<Self> {
        if values.len() != weights.dim() {
            return Err(Error::DimensionMismatch(
                "values/weights length mismatch".into(),
            ));
        }
        if values.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(Error::NotDensity("values must be nonnegative".into()));
        }
        let mut m = DVector::from_fn(values.len(), |i, _| values[i] * weights.get(i));
        let sum: f64 = m.iter().sum();
        if sum <= 0.0 {
            return Err(Error::NotDensity("values have zero total mass".into()));
        }
        m /= sum;
        Density::new(m, weights)
    }

    /// Random density on `d` equal cells (uniform i.i.d. masses,
    /// normalized).
    pub fn random<R: Rng>(d: usize, rng: &mut R) -> Result<Self> {
        let mut m = DVector::from_fn(d, |_, _| rng.gen_range(0.0..1.0_f64));
        let sum: f64 = m.iter().sum();
        if sum <= 0.0 {
            m.fill(1.0 / d as f64);
        } else {
            m /= sum;
        }
        Density::new(m, Weights::uniform(d)?)
    }

    /// Renormalize a nearly-unit mass vector (e.g. a long-run average whose
    /// float drift exceeds the strict gate) into a density.
    pub fn renormalized(mut masses: DVector<f64>, weights: Weights) -> Result<Self> {
        for m in masses.iter_mut() {
            if *m < 0.0 && *m > -1e-9 {
                *m = 0.0;
            }
        }
        let sum: f64 = masses.iter().sum();
        if !(sum > 0.0) || !sum.is_finite() {
            return Err(Error::NotDensity(format!("total mass {sum}")));
        }
        masses /= sum;
        Density::new(masses, weights)
    }

    pub fn dim(&self) -> usize {
        self.masses.len()
    }

    pub fn masses(&self) -> &DVector<f64> {
        &self.masses
    }

    pub fn weights(&self) -> &Weights {
        &self.weights
    }

    /// Mass on a set of cells.
    pub fn mass_on(&self, cells: &[usize]) -> Result<f64> {
        let mut acc = 0.0;
        for &c in cells {
            if c >= self.dim() {
                return Err(Error::OutOfRange(format!("cell {c} out of {}", self.dim())));
            }
            acc += self.masses[c];
        }
        Ok(acc)
    }

    /// Pointwise value on cell `i`.
    pub fn value(&self, i: usize) -> f64 {
        self.masses[i] / self.weights.get(i)
    }

    /// All pointwise values.
    pub fn values(&self) -> DVector<f64> {
        DVector::from_fn(self.dim(), |i, _| self.value(i))
    }

    /// L1 distance to another density on the same partition.
    pub fn l1_distance(&self, other: &Density) -> f64 {
        (&self.masses - &other.masses).iter().map(|x| x.abs()).sum()
    }

    /// Lp norm of the density function (`p >= 1`), with respect to the
    /// reference measure.
    pub fn lp_norm(&self, p: f64) -> f64 {
        let s: f64 = (0..self.dim())
            .map(|i| self.value(i).powf(p) * self.weights.get(i))
            .sum();
        s.powf(1.0 / p)
    }

    /// Measure of the level set `{value > alpha}`.
    pub fn level_set_measure(&self, alpha: f64) -> f64 {
        (0..self.dim())
            .filter(|&i| self.value(i) > alpha)
            .map(|i| self.weights.get(i))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_density_has_value_one_everywhere() {
        let d = Density::uniform(Weights::uniform(4).unwrap());
        for i in 0..4 {
            assert_eq!(d.value(i), 1.0);
            assert_eq!(d.masses()[i], 0.25);
        }
        assert_eq!(d.lp_norm(2.0), 1.0);
    }

    #[test]
    fn rejects_negative_and_non_unit_mass() {
        assert!(matches!(
            Density::from_masses(&[0.5, -0.5, 1.0]),
            Err(Error::NotDensity(_))
        ));
        assert!(matches!(
            Density::from_masses(&[0.5, 0.6]),
            Err(Error::NotDensity(_))
        ));
        // just inside the tolerance is accepted
        assert!(Density::from_masses(&[0.5, 0.5 + 0.5e-12]).is_ok());
    }

    #[test]
    fn mass_on_sums_cells() {
        let d = Density::from_masses(&[0.7, 0.1, 0.1, 0.1]).unwrap();
        assert_eq!(d.mass_on(&[0]).unwrap(), 0.7);
        assert_eq!(d.mass_on(&[1, 3]).unwrap(), 0.2);
        assert!(d.mass_on(&[4]).is_err());
    }

    #[test]
    fn values_divide_by_cell_weights() {
        let d = Density::from_masses(&[0.7, 0.1, 0.1, 0.1]).unwrap();
        assert_eq!(d.value(0), 2.8);
        assert_eq!(d.level_set_measure(1.0), 0.25);
        assert_eq!(d.level_set_measure(0.1), 1.0);
    }

    #[test]
    fn point_mass_lives_on_one_cell() {
        let d = Density::point_mass(2, Weights::uniform(4).unwrap()).unwrap();
        assert_eq!(d.masses().as_slice(), &[0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn random_density_is_a_density() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let d = Density::random(6, &mut rng).unwrap();
            let sum: f64 = d.masses().iter().sum();
            assert!((sum - 1.0).abs() <= MASS_TOL);
            assert!(d.masses().iter().all(|&m| m >= 0.0));
        }
    }

    #[test]
    fn renormalized_accepts_drifted_mass() {
        let m = DVector::from_row_slice(&[0.5, 0.5 + 3e-11]);
        let d = Density::renormalized(m, Weights::uniform(2).unwrap()).unwrap();
        let sum: f64 = d.masses().iter().sum();
        assert!((sum - 1.0).abs() <= MASS_TOL);
    }
}
