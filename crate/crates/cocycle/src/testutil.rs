//! Shared fixtures for the unit tests: small cocycles with hand-checked
//! invariant families.

use crate::density::Density;
use crate::driving::DrivingSystem;
use crate::markov::{MarkovCocycle, MarkovMatrix};

/// The worked two-periodic example used across the crate: generators for
/// labels 0 and 1 over a 2-cycle.
pub(crate) fn period2() -> MarkovCocycle {
    let p0 = MarkovMatrix::from_rows(&[&[0.5, 0.3], &[0.5, 0.7]]).unwrap();
    let p1 = MarkovMatrix::from_rows(&[&[0.9, 0.2], &[0.1, 0.8]]).unwrap();
    MarkovCocycle::new(vec![p0, p1], DrivingSystem::cycle(2).unwrap()).unwrap()
}

/// Exact invariant pair for [`period2`]: the fixed vector of `P1 P0` at
/// fiber 0 and its image under `P0` at fiber 1. `P1 P0 = [[0.55, 0.41],
/// [0.45, 0.59]]` has fixed vector `[41/86, 45/86]`; both fractions are
/// exactly representable ratios so the residual checks hold to rounding.
pub(crate) fn period2_invariant() -> (Density, Density) {
    let h0 = Density::from_masses(&[41.0 / 86.0, 45.0 / 86.0]).unwrap();
    let h1 = Density::from_masses(&[34.0 / 86.0, 52.0 / 86.0]).unwrap();
    (h0, h1)
}
