//! Shift-invert Arnoldi for a few eigenvalues of a large real operator
//! nearest to a real shift.

use faer::Mat;
use num_complex::Complex64;

use super::dense;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct RitzPair {
    /// Eigenvalue estimate of the original operator.
    pub value: Complex64,
    /// Arnoldi residual `|h_{k+1,k}·y_k|` for the inverted operator.
    pub residual: f64,
    pub vector: Vec<Complex64>,
}

/// Runs `k` Arnoldi steps with `apply_inv(x) ← (A − σ)⁻¹x` and returns Ritz
/// pairs of `A` ordered by distance to `sigma`.
pub fn shift_invert(
    n: usize,
    sigma: f64,
    k: usize,
    start: &[f64],
    apply_inv: impl Fn(&mut [f64]),
) -> Result<Vec<RitzPair>> {
    let k = k.min(n);
    let mut v: Vec<Vec<f64>> = Vec::with_capacity(k + 1);
    let mut h = vec![vec![0.0; k]; k + 1];
    let nrm = norm(start);
    if nrm == 0.0 {
        return Err(Error::Solver("zero start vector".into()));
    }
    v.push(start.iter().map(|x| x / nrm).collect());
    let mut m = k;
    for j in 0..k {
        let mut w = v[j].clone();
        apply_inv(&mut w);
        for _ in 0..2 {
            for (i, vi) in v.iter().enumerate() {
                let d = dot(vi, &w);
                h[i][j] += d;
                for (wk, vk) in w.iter_mut().zip(vi) {
                    *wk -= d * vk;
                }
            }
        }
        let hn = norm(&w);
        h[j + 1][j] = hn;
        if hn < 1e-14 * h[j][j].abs().max(1.0) {
            m = j + 1;
            break;
        }
        v.push(w.into_iter().map(|x| x / hn).collect());
    }
    let hm = Mat::<Complex64>::from_fn(m, m, |i, j| Complex64::new(h[i][j], 0.0));
    let (theta, ys) = dense::eigen(&hm)?;
    let beta = if m < v.len() { h[m][m - 1] } else { 0.0 };
    let mut pairs: Vec<RitzPair> = theta
        .iter()
        .zip(ys)
        .filter(|(t, _)| t.norm() > 0.0)
        .map(|(t, y)| {
            let mut x = vec![Complex64::new(0.0, 0.0); n];
            for (yi, vi) in y.iter().zip(&v) {
                for (xk, vk) in x.iter_mut().zip(vi) {
                    *xk += yi * vk;
                }
            }
            RitzPair { value: sigma + 1.0 / t, residual: (beta * y[m - 1]).norm(), vector: x }
        })
        .collect();
    pairs.sort_by(|p, q| (p.value - sigma).norm().total_cmp(&(q.value - sigma).norm()));
    Ok(pairs)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
