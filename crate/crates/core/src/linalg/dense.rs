//! Thin wrappers over `faer` for the dense problems (wave-train Newton,
//! Bloch spectra, small Hessenberg eigenproblems).

use faer::linalg::solvers::Solve;
use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Solves `A x = b` by partially pivoted LU.
pub fn solve(a: &Mat<f64>, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.nrows();
    let rhs = Mat::<f64>::from_fn(n, 1, |i, _| b[i]);
    let x = a.partial_piv_lu().solve(&rhs);
    let out: Vec<f64> = (0..n).map(|i| x[(i, 0)]).collect();
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular("dense LU produced non-finite solution".into()));
    }
    Ok(out)
}

/// Reciprocal condition proxy `min|σ| / max|σ|`.
pub fn rcond(a: &Mat<f64>) -> Result<f64> {
    let s = a
        .singular_values()
        .map_err(|e| Error::Solver(format!("svd: {e:?}")))?;
    let hi = s.first().copied().unwrap_or(0.0);
    let lo = s.last().copied().unwrap_or(0.0);
    Ok(if hi > 0.0 { lo / hi } else { 0.0 })
}

pub fn eigenvalues(a: &Mat<Complex64>) -> Result<Vec<Complex64>> {
    a.eigenvalues().map_err(|e| Error::Solver(format!("eigenvalues: {e:?}")))
}

/// Eigenvalues with right eigenvectors (as columns).
pub fn eigen(a: &Mat<Complex64>) -> Result<(Vec<Complex64>, Vec<Vec<Complex64>>)> {
    let e = a.eigen().map_err(|e| Error::Solver(format!("eigen: {e:?}")))?;
    let n = a.nrows();
    let s = e.S().column_vector();
    let u = e.U();
    let vals = (0..n).map(|i| s[i]).collect();
    let vecs = (0..n).map(|j| (0..n).map(|i| u[(i, j)]).collect()).collect();
    Ok((vals, vecs))
}

/// Smallest singular triplet of a (numerically) rank-deficient matrix.
#[derive(Debug, Clone)]
pub struct NullSpace {
    /// Spans ker A.
    pub right: Vec<Complex64>,
    /// Spans ker Aᴴ.
    pub left: Vec<Complex64>,
    pub sigma_min: f64,
    pub sigma_next: f64,
    pub sigma_max: f64,
}

pub fn null_vectors(a: &Mat<Complex64>) -> Result<NullSpace> {
    let n = a.nrows();
    let svd = a.svd().map_err(|e| Error::Solver(format!("svd: {e:?}")))?;
    let s = svd.S().column_vector();
    let (u, v) = (svd.U(), svd.V());
    Ok(NullSpace {
        right: (0..n).map(|i| v[(i, n - 1)]).collect(),
        left: (0..n).map(|i| u[(i, n - 1)]).collect(),
        sigma_min: s[n - 1].re,
        sigma_next: s[n - 2].re,
        sigma_max: s[0].re,
    })
}

pub fn to_complex(a: &Mat<f64>) -> Mat<Complex64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| Complex64::new(a[(i, j)], 0.0))
}
