//! Dense-matrix helpers shared by the cocycle machinery: induced operator
//! norms and an allocation-free matrix-vector product for hot loops.

use nalgebra::{DMatrix, DVector};

/// Vector norms used on the fiber spaces, together with the operator norms
/// they induce on matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    /// Sum of absolute values; induces the maximum column absolute sum.
    AbsoluteSum,
    /// Euclidean length; induces the largest singular value.
    Euclidean,
    /// Maximum absolute entry; induces the maximum row absolute sum.
    Max,
}

impl NormKind {
    /// Norm of a vector.
    pub fn vector(&self, v: &DVector<f64>) -> f64 {
        match self {
            NormKind::AbsoluteSum => v.iter().map(|x| x.abs()).sum(),
            NormKind::Euclidean => v.norm(),
            NormKind::Max => v.iter().fold(0.0_f64, |a, x| a.max(x.abs())),
        }
    }

    /// Induced operator norm of a matrix.
    pub fn induced(&self, m: &DMatrix<f64>) -> f64 {
        match self {
            NormKind::AbsoluteSum => max_column_abs_sum(m),
            NormKind::Euclidean => spectral_norm(m, 1e-10),
            NormKind::Max => max_row_abs_sum(m),
        }
    }
}

impl std::fmt::Display for NormKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            NormKind::AbsoluteSum => "absolute-sum",
            NormKind::Euclidean => "euclidean",
            NormKind::Max => "max",
        };
        f.write_str(name)
    }
}

/// Maximum column absolute sum (operator norm induced by the l1 norm).
pub fn max_column_abs_sum(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0_f64, f64::max)
}

/// Maximum row absolute sum (operator norm induced by the max norm).
pub fn max_row_abs_sum(m: &DMatrix<f64>) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0_f64, f64::max)
}

/// Largest singular value, by power iteration on `m^T m`.
///
/// The iteration stops when two successive singular-value estimates agree to
/// `tol` relative accuracy. Deterministic: the starting vector is fixed.
pub fn spectral_norm(m: &DMatrix<f64>, tol: f64) -> f64 {
    let d = m.ncols();
    if d == 0 || m.nrows() == 0 {
        return 0.0;
    }
    // A ramped start avoids being orthogonal to the leading singular vector
    // for structured matrices (permutations, rotations).
    let mut v = DVector::from_fn(d, |i, _| 1.0 + (i as f64) / (d as f64 + 1.0));
    v /= v.norm();
    let mut w = DVector::zeros(m.nrows());
    let mut u = DVector::zeros(d);
    let mut sigma = 0.0_f64;
    for _ in 0..20_000 {
        gemv_into(m, v.as_slice(), w.as_mut_slice());
        gemv_tr_into(m, w.as_slice(), u.as_mut_slice());
        let lambda = u.norm();
        if lambda == 0.0 {
            return 0.0;
        }
        let next = lambda.sqrt();
        u /= lambda;
        std::mem::swap(&mut v, &mut u);
        if (next - sigma).abs() <= tol * next.max(1.0) {
            return next;
        }
        sigma = next;
    }
    sigma
}

/// `y = m * x` without allocating; `m` is column-major, so the inner loop
/// walks one column at a time.
pub fn gemv_into(m: &DMatrix<f64>, x: &[f64], y: &mut [f64]) {
    let rows = m.nrows();
    let cols = m.ncols();
    debug_assert_eq!(cols, x.len());
    debug_assert_eq!(rows, y.len());
    let s = m.as_slice();
    y.fill(0.0);
    for (j, &xj) in x.iter().enumerate().take(cols) {
        if xj == 0.0 {
            continue;
        }
        let col = &s[j * rows..(j + 1) * rows];
        for i in 0..rows {
            y[i] += col[i] * xj;
        }
    }
}

/// `y = m^T * x` without allocating.
pub fn gemv_tr_into(m: &DMatrix<f64>, x: &[f64], y: &mut [f64]) {
    let rows = m.nrows();
    let cols = m.ncols();
    debug_assert_eq!(rows, x.len());
    debug_assert_eq!(cols, y.len());
    let s = m.as_slice();
    for j in 0..cols {
        let col = &s[j * rows..(j + 1) * rows];
        let mut acc = 0.0;
        for i in 0..rows {
            acc += col[i] * x[i];
        }
        y[j] = acc;
    }
}

/// Sum of absolute entry differences between two matrices of equal shape.
pub fn entrywise_l1_distance(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).sum()
}

/// Largest absolute entry difference between two matrices of equal shape.
pub fn entrywise_max_distance(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0_f64, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn induced_norms_on_a_fixed_matrix() {
        // columns sum (abs) to 1.2 and 0.9; rows to 1.4 and 0.7.
        let m = DMatrix::from_row_slice(2, 2, &[0.9, -0.5, 0.3, 0.4]);
        assert_eq!(max_column_abs_sum(&m), 1.2);
        assert_eq!(max_row_abs_sum(&m), 1.4);
    }

    #[test]
    fn spectral_norm_of_diagonal_and_rotation() {
        let diag = DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 0.25]);
        assert!((spectral_norm(&diag, 1e-12) - 0.5).abs() < 1e-10);

        let (s, c) = (3.0_f64.sin(), 3.0_f64.cos());
        let rot = DMatrix::from_row_slice(2, 2, &[c, -s, s, c]);
        assert!((spectral_norm(&rot, 1e-12) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn gemv_matches_nalgebra() {
        let m = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let x = DVector::from_row_slice(&[0.5, -1.0]);
        let mut y = vec![0.0; 3];
        gemv_into(&m, x.as_slice(), &mut y);
        let want = &m * &x;
        assert_eq!(y, want.as_slice());

        let z = DVector::from_row_slice(&[1.0, 0.0, -2.0]);
        let mut yt = vec![0.0; 2];
        gemv_tr_into(&m, z.as_slice(), &mut yt);
        let want_t = m.transpose() * &z;
        assert_eq!(yt, want_t.as_slice());
    }
}
