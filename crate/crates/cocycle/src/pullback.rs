//! Efficient evaluation of pulled-back compositions.
//!
//! The pullback term of depth `n` into the fiber over `w` is
//!
//! ```text
//!   u_n = G[l_1] G[l_2] .. G[l_n] f_n,      l_k = label(s^{-k} w),
//! ```
//!
//! where the seed `f_n` lives on the fiber `s^{-n} w` (it is either one
//! fixed vector or depends on the fiber's label). Each new step inserts a
//! factor on the *inside* of the product, so the naive recomputation of
//! `u_1, .., u_K` costs `O(K^2 d^2)`. Two evaluation strategies avoid that:
//!
//! - [`PullbackStream`] streams the terms in order for cyclic driving. The
//!   backward label sequence is periodic, so `u_{r + jN} = M_r C_r^j f`
//!   with `N` precomputed prefix products `M_r` and cycle-return products
//!   `C_r`; each term then costs at most two matrix-vector products.
//! - [`pullback_partial`] evaluates the partial sum `u_1 + .. + u_K` and
//!   the deepest term `u_K` together in one backward pass of `O(K d^2)`
//!   work and `O(d)` memory, for any driving system with random access to
//!   labels. Callers that need convergence evidence call it at geometrically
//!   spaced horizons.

use nalgebra::{DMatrix, DVector};

use crate::driving::{DrivingSystem, Point};
use crate::error::{Error, Result};
use crate::linalg::gemv_into;

/// Cap on the entries held by the precomputed prefix and return products.
const PHASE_TABLE_BUDGET: usize = 50_000_000;

/// Seed vectors fed into the deep end of the composition.
#[derive(Debug, Clone)]
pub enum SeedTable {
    /// The same vector regardless of depth.
    Fixed(DVector<f64>),
    /// One seed per label of the driving alphabet; depth `n` uses the entry
    /// for `label(s^{-n} w)`.
    ByLabel(Vec<DVector<f64>>),
}

impl SeedTable {
    pub(crate) fn validate(&self, dim: usize, alphabet: usize) -> Result<()> {
        match self {
            SeedTable::Fixed(f) => {
                if f.len() != dim {
                    return Err(Error::DimensionMismatch(format!(
                        "seed dim {} vs operator dim {}",
                        f.len(),
                        dim
                    )));
                }
            }
            SeedTable::ByLabel(table) => {
                if table.len() != alphabet {
                    return Err(Error::DimensionMismatch(format!(
                        "seed table has {} entries for an alphabet of {}",
                        table.len(),
                        alphabet
                    )));
                }
                if table.iter().any(|f| f.len() != dim) {
                    return Err(Error::DimensionMismatch(
                        "seed table entries have mixed dimensions".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub(crate) fn at(&self, label: usize) -> &DVector<f64> {
        match self {
            SeedTable::Fixed(f) => f,
            SeedTable::ByLabel(table) => &table[label],
        }
    }
}

fn validate_generators(generators: &[DMatrix<f64>], driving: &DrivingSystem) -> Result<usize> {
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
    let d = generators[0].nrows();
    if generators
        .iter()
        .any(|g| g.nrows() != d || g.ncols() != d || d == 0)
    {
        return Err(Error::DimensionMismatch(
            "generators must be nonempty square matrices of one dimension".into(),
        ));
    }
    Ok(d)
}

fn backward_label(driving: &DrivingSystem, base: Point, depth: usize) -> Result<usize> {
    let k = i64::try_from(depth)
        .map_err(|_| Error::OutOfRange(format!("pullback depth {depth} exceeds i64")))?;
    driving.label(driving.step_by(base, -k)?)
}

/// Streams the pullback terms `u_1, u_2, ..` into one fiber of a finite
/// cycle.
#[derive(Debug, Clone)]
pub struct PullbackStream {
    /// `prefix[r] = G[l_1] .. G[l_r]`, with `prefix[0]` the identity
    /// (stored as `None` to skip the multiply).
    prefix: Vec<Option<DMatrix<f64>>>,
    /// `cycle_return[r] = G[l_{r+1}] .. G[l_{r+N}]`.
    cycle_return: Vec<DMatrix<f64>>,
    /// `phase_state[r] = C_r^{laps[r]} seed_r`.
    phase_state: Vec<DVector<f64>>,
    laps: Vec<usize>,
    depth: usize,
    out: DVector<f64>,
    scratch: DVector<f64>,
}

impl PullbackStream {
    /// Build the stream for the fiber over `base`. Only cyclic driving
    /// supports streaming; for path driving use [`pullback_partial`] at
    /// chosen horizons instead.
    pub fn new(
        generators: &[DMatrix<f64>],
        driving: &DrivingSystem,
        base: Point,
        seeds: &SeedTable,
    ) -> Result<Self> {
        let d = validate_generators(generators, driving)?;
        seeds.validate(d, driving.alphabet_size())?;
        let DrivingSystem::FiniteCycle { n } = driving else {
            return Err(Error::Unsupported(
                "streaming pullback needs cyclic driving; evaluate partial sums at chosen \
                 horizons for path driving"
                    .into(),
            ));
        };
        let n = *n;
        driving.label(base)?;
        if 2 * n * d * d > PHASE_TABLE_BUDGET {
            return Err(Error::Unsupported(format!(
                "phase tables for cycle length {n} at dimension {d} exceed the memory budget; \
                 evaluate partial sums at chosen horizons instead"
            )));
        }

        // backward labels repeat with period n; 2n of them cover every
        // window the tables need
        let labels: Vec<usize> = (1..=2 * n)
            .map(|k| backward_label(driving, base, k))
            .collect::<Result<_>>()?;

        let mut prefix: Vec<Option<DMatrix<f64>>> = Vec::with_capacity(n);
        prefix.push(None);
        let mut acc = DMatrix::<f64>::identity(d, d);
        for r in 1..n {
            acc = &acc * &generators[labels[r - 1]];
            prefix.push(Some(acc.clone()));
        }

        let mut cycle_return = Vec::with_capacity(n);
        for r in 0..n {
            let mut c = generators[labels[r]].clone();
            for k in r + 1..r + n {
                c = &c * &generators[labels[k]];
            }
            cycle_return.push(c);
        }

        // the seed of every term of phase r lives on the fiber with label
        // (base - r) mod n, which is labels[r - 1] shifted: depth r has
        // label l_r = labels[r - 1]; phase 0 terms have depth jN with label
        // l_N = labels[n - 1]
        let phase_state: Vec<DVector<f64>> = (0..n)
            .map(|r| {
                let label = if r == 0 { labels[n - 1] } else { labels[r - 1] };
                seeds.at(label).clone()
            })
            .collect();

        Ok(PullbackStream {
            prefix,
            cycle_return,
            phase_state,
            laps: vec![0; n],
            depth: 0,
            out: DVector::zeros(d),
            scratch: DVector::zeros(d),
        })
    }

    pub fn dim(&self) -> usize {
        self.out.len()
    }

    /// Depth of the last produced term.
    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Produce the next term `u_{depth + 1}`.
    pub fn next_term(&mut self) -> &DVector<f64> {
        self.depth += 1;
        let n = self.cycle_return.len();
        let r = self.depth % n;
        let lap = (self.depth - r) / n;
        while self.laps[r] < lap {
            gemv_into(
                &self.cycle_return[r],
                self.phase_state[r].as_slice(),
                self.scratch.as_mut_slice(),
            );
            std::mem::swap(&mut self.phase_state[r], &mut self.scratch);
            self.laps[r] += 1;
        }
        match &self.prefix[r] {
            Some(m) => gemv_into(m, self.phase_state[r].as_slice(), self.out.as_mut_slice()),
            None => self.out.copy_from(&self.phase_state[r]),
        }
        &self.out
    }
}

/// Partial sums of a pullback stream evaluated in one backward pass.
#[derive(Debug, Clone)]
pub struct PullbackPartial {
    /// `u_1 + u_2 + .. + u_depth`.
    pub sum: DVector<f64>,
    /// The deepest term `u_depth`.
    pub last: DVector<f64>,
    pub depth: usize,
}

/// Evaluate `sum_{n=1}^{depth} u_n` and `u_depth` for the fiber over
/// `base`, for any driving system. Runs backward from the deepest factor,
/// so the whole evaluation costs `depth` matrix-vector products.
pub fn pullback_partial(
    generators: &[DMatrix<f64>],
    driving: &DrivingSystem,
    base: Point,
    seeds: &SeedTable,
    depth: usize,
) -> Result<PullbackPartial> {
    let d = validate_generators(generators, driving)?;
    seeds.validate(d, driving.alphabet_size())?;
    driving.label(base)?;
    if depth == 0 {
        return Err(Error::InvalidArgument(
            "partial sums need depth >= 1".into(),
        ));
    }

    let deepest = backward_label(driving, base, depth)?;
    let mut sum = DVector::zeros(d);
    gemv_into(
        &generators[deepest],
        seeds.at(deepest).as_slice(),
        sum.as_mut_slice(),
    );
    let mut last = sum.clone();
    let mut scratch = DVector::zeros(d);

    for k in (1..depth).rev() {
        let label = backward_label(driving, base, k)?;
        let g = &generators[label];

        gemv_into(g, last.as_slice(), scratch.as_mut_slice());
        std::mem::swap(&mut last, &mut scratch);

        scratch.copy_from(&sum);
        scratch += seeds.at(label);
        gemv_into(g, scratch.as_slice(), sum.as_mut_slice());
    }

    Ok(PullbackPartial { sum, last, depth })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Brute-force oracle: apply the factors from the inside out, exactly as
    /// the definition reads.
    fn brute_term(
        generators: &[DMatrix<f64>],
        driving: &DrivingSystem,
        base: Point,
        seeds: &SeedTable,
        depth: usize,
    ) -> DVector<f64> {
        let labels = driving.past_labels(base, depth).unwrap();
        let mut v = seeds.at(labels[depth - 1]).clone();
        for &l in labels.iter().rev() {
            v = &generators[l] * v;
        }
        v
    }

    fn period2_generators() -> Vec<DMatrix<f64>> {
        vec![
            DMatrix::from_row_slice(2, 2, &[0.5, 0.3, 0.5, 0.7]),
            DMatrix::from_row_slice(2, 2, &[0.9, 0.2, 0.1, 0.8]),
        ]
    }

    #[test]
    fn stream_matches_the_hand_computed_trace() {
        // into fiber 0 of the 2-cycle: u_1 = G1 [1,0] = [0.9, 0.1],
        // u_2 = G1 G0 [1,0] = [0.55, 0.45]
        let gens = period2_generators();
        let driving = DrivingSystem::cycle(2).unwrap();
        let seeds = SeedTable::Fixed(DVector::from_row_slice(&[1.0, 0.0]));
        let mut s = PullbackStream::new(&gens, &driving, 0, &seeds).unwrap();
        let u1 = s.next_term().clone();
        assert!((u1[0] - 0.9).abs() < 1e-15);
        assert!((u1[1] - 0.1).abs() < 1e-15);
        let u2 = s.next_term().clone();
        assert!((u2[0] - 0.55).abs() < 1e-15);
        assert!((u2[1] - 0.45).abs() < 1e-15);
    }

    #[test]
    fn stream_matches_brute_force_on_cycles() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let driving = DrivingSystem::cycle(3).unwrap();
        let gens: Vec<DMatrix<f64>> = (0..3)
            .map(|_| {
                crate::markov::MarkovMatrix::random(4, &mut rng)
                    .unwrap()
                    .as_matrix()
                    .clone()
            })
            .collect();
        let seeds = SeedTable::Fixed(DVector::from_row_slice(&[0.1, 0.2, 0.3, 0.4]));
        for base in 0..3 {
            let mut s = PullbackStream::new(&gens, &driving, base, &seeds).unwrap();
            for depth in 1..=20 {
                let got = s.next_term().clone();
                let want = brute_term(&gens, &driving, base, &seeds, depth);
                assert_eq!(s.depth(), depth);
                assert!(
                    (got - want).iter().all(|x| x.abs() < 1e-13),
                    "depth {depth} base {base}"
                );
            }
        }
    }

    #[test]
    fn stream_handles_label_dependent_seeds() {
        let gens = period2_generators();
        let driving = DrivingSystem::cycle(2).unwrap();
        let seeds = SeedTable::ByLabel(vec![
            DVector::from_row_slice(&[1.0, 0.0]),
            DVector::from_row_slice(&[0.25, 0.75]),
        ]);
        for base in 0..2 {
            let mut s = PullbackStream::new(&gens, &driving, base, &seeds).unwrap();
            for depth in 1..=9 {
                let got = s.next_term().clone();
                let want = brute_term(&gens, &driving, base, &seeds, depth);
                assert!((got - want).iter().all(|x| x.abs() < 1e-13));
            }
        }
    }

    #[test]
    fn stream_on_a_one_cycle_is_plain_iteration() {
        let g = DMatrix::from_row_slice(2, 2, &[0.9, 0.5, 0.1, 0.5]);
        let driving = DrivingSystem::cycle(1).unwrap();
        let seeds = SeedTable::Fixed(DVector::from_row_slice(&[1.0, 0.0]));
        let mut s = PullbackStream::new(std::slice::from_ref(&g), &driving, 0, &seeds).unwrap();
        let mut expect = DVector::from_row_slice(&[1.0, 0.0]);
        for _ in 0..30 {
            expect = &g * expect;
            let got = s.next_term();
            assert!((got - &expect).iter().all(|x| x.abs() < 1e-13));
        }
    }

    #[test]
    fn stream_rejects_path_driving() {
        let gens = period2_generators();
        let driving = DrivingSystem::bernoulli(vec![0.5, 0.5], 1).unwrap();
        let seeds = SeedTable::Fixed(DVector::from_row_slice(&[1.0, 0.0]));
        assert!(matches!(
            PullbackStream::new(&gens, &driving, 0, &seeds),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn partial_sums_match_brute_force_on_cycles() {
        let gens = period2_generators();
        let driving = DrivingSystem::cycle(2).unwrap();
        let seeds = SeedTable::Fixed(DVector::from_row_slice(&[0.5, 0.5]));
        for base in 0..2 {
            for depth in 1..=15 {
                let got = pullback_partial(&gens, &driving, base, &seeds, depth).unwrap();
                let want_last = brute_term(&gens, &driving, base, &seeds, depth);
                // the deepest term applies the factors in the same order as
                // the definition, so it matches exactly
                assert_eq!(got.last, want_last);
                let mut want_sum = DVector::zeros(2);
                for n in 1..=depth {
                    want_sum += brute_term(&gens, &driving, base, &seeds, n);
                }
                assert!((got.sum - want_sum).iter().all(|x| x.abs() < 1e-13));
            }
        }
    }

    #[test]
    fn partial_sums_work_over_path_driving() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        let driving = DrivingSystem::bernoulli(vec![0.3, 0.7], 99).unwrap();
        let gens: Vec<DMatrix<f64>> = (0..2)
            .map(|_| {
                crate::markov::MarkovMatrix::random(3, &mut rng)
                    .unwrap()
                    .as_matrix()
                    .clone()
            })
            .collect();
        let seeds = SeedTable::ByLabel(vec![
            DVector::from_row_slice(&[1.0, 0.0, 0.0]),
            DVector::from_row_slice(&[0.0, 0.5, 0.5]),
        ]);
        for base in [-3, 0, 5] {
            for depth in [1usize, 2, 7, 19] {
                let got = pullback_partial(&gens, &driving, base, &seeds, depth).unwrap();
                assert_eq!(got.last, brute_term(&gens, &driving, base, &seeds, depth));
                let mut want_sum = DVector::zeros(3);
                for n in 1..=depth {
                    want_sum += brute_term(&gens, &driving, base, &seeds, n);
                }
                assert!((got.sum - want_sum).iter().all(|x| x.abs() < 1e-12));
            }
        }
    }

    #[test]
    fn partial_sum_rejects_depth_zero_and_bad_seeds() {
        let gens = period2_generators();
        let driving = DrivingSystem::cycle(2).unwrap();
        let seeds = SeedTable::Fixed(DVector::from_row_slice(&[1.0, 0.0]));
        assert!(pullback_partial(&gens, &driving, 0, &seeds, 0).is_err());
        let bad = SeedTable::ByLabel(vec![DVector::from_row_slice(&[1.0, 0.0])]);
        assert!(pullback_partial(&gens, &driving, 0, &bad, 3).is_err());
    }
}
