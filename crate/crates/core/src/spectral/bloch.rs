//! Floquet–Bloch spectra of the wave train, the critical curve through the
//! origin, and the group velocity from the adjoint kernel.

use faer::Mat;
use num_complex::Complex64 as C;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{banded, dense};
use crate::model::Params;
use crate::wavetrain::{diff_matrix, WaveTrain};

/// `D(∂ξ+ν)² + c(∂ξ+ν) + F'(u_wt)` on one period, unknowns ordered `(u, w)`.
pub fn bloch_matrix(params: &Params, wt: &WaveTrain, nu: C) -> Mat<C> {
    let m = wt.m;
    let d = diff_matrix(m);
    let s = 1.0 / wt.l;
    let dn = |i: usize, j: usize| C::from(d[i][j] * s) + if i == j { nu } else { C::from(0.0) };
    // (D1 + ν)² = D1² + 2νD1 + ν²
    let mut d2 = vec![vec![0.0; m]; m];
    for i in 0..m {
        for k in 0..m {
            let a = d[i][k];
            if a != 0.0 {
                for j in 0..m {
                    d2[i][j] += a * d[k][j];
                }
            }
        }
    }
    let c = wt.c;
    Mat::from_fn(2 * m, 2 * m, |i, j| {
        let (bi, ii) = (i / m, i % m);
        let (bj, jj) = (j / m, j % m);
        match (bi, bj) {
            (0, 0) => {
                let mut v = C::from(d2[ii][jj] * s * s) + 2.0 * nu * d[ii][jj] * s + c * dn(ii, jj);
                if ii == jj {
                    v += nu * nu + params.df(wt.u[ii]);
                }
                v
            }
            (0, 1) => C::from(if ii == jj { -1.0 } else { 0.0 }),
            (1, 0) => C::from(if ii == jj { params.eps } else { 0.0 }),
            _ => c * dn(ii, jj) - if ii == jj { params.eps * params.gamma } else { 0.0 },
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlochSpectrum {
    pub k_grid: Vec<f64>,
    /// Per-`k` eigenvalues sorted by descending real part.
    pub eigenvalues: Vec<Vec<C>>,
    pub theta_fit: f64,
    pub c_g: f64,
    #[serde(rename = "D_eff")]
    pub d_eff: f64,
    /// Eigenvalue of smallest modulus at `k = 0`.
    pub zero_eigenvalue: C,
    /// `−Re` of the next eigenvalue at `k = 0`.
    pub gap: f64,
    /// Largest real part over `k ≠ 0`.
    pub max_re_nonzero_k: f64,
    pub failed_k: Vec<f64>,
    pub violations: Vec<String>,
}

fn sorted_desc(mut v: Vec<C>) -> Vec<C> {
    v.sort_by(|a, b| b.re.total_cmp(&a.re));
    v
}

/// Eigenvalues of `bloch_matrix(ik)` for `n_k` uniform `k ∈ [−k_wt/2, k_wt/2)`.
pub fn bloch_sweep(params: &Params, wt: &WaveTrain, n_k: usize) -> Result<BlochSpectrum> {
    if n_k < 2 {
        return Err(Error::InvalidInput("bloch sweep needs n_k >= 2".into()));
    }
    let k_grid: Vec<f64> = (0..n_k).map(|i| -0.5 * wt.k_wt + wt.k_wt * i as f64 / n_k as f64).collect();
    let results: Vec<Result<Vec<C>>> = k_grid
        .par_iter()
        .map(|&k| dense::eigenvalues(&bloch_matrix(params, wt, C::new(0.0, k))).map(sorted_desc))
        .collect();
    let mut eigenvalues = Vec::with_capacity(n_k);
    let mut failed_k = Vec::new();
    for (k, r) in k_grid.iter().zip(results) {
        match r {
            Ok(v) => eigenvalues.push(v),
            Err(_) => {
                failed_k.push(*k);
                eigenvalues.push(Vec::new());
            }
        }
    }
    // k = 0 is always on the grid when n_k is even; otherwise solve it directly
    let zero_vals = match k_grid.iter().position(|&k| k.abs() < 1e-14 * wt.k_wt) {
        Some(i) if !eigenvalues[i].is_empty() => eigenvalues[i].clone(),
        _ => sorted_desc(dense::eigenvalues(&bloch_matrix(params, wt, C::from(0.0)))?),
    };
    let iz = (0..zero_vals.len()).min_by(|&a, &b| zero_vals[a].norm().total_cmp(&zero_vals[b].norm())).unwrap();
    let zero_eigenvalue = zero_vals[iz];
    let next_re = zero_vals.iter().enumerate().filter(|(i, _)| *i != iz).map(|(_, v)| v.re).fold(f64::MIN, f64::max);
    let gap = -next_re;
    let mut theta = f64::INFINITY;
    let mut max_re = f64::MIN;
    let mut violations = Vec::new();
    for (k, vals) in k_grid.iter().zip(&eigenvalues) {
        if k.abs() < 1e-14 * wt.k_wt || vals.is_empty() {
            continue;
        }
        let top = vals[0].re;
        max_re = max_re.max(top);
        theta = theta.min(-top / (k * k));
        if top >= 0.0 {
            violations.push(format!("Re λ = {top:.3e} >= 0 at k = {k:.5}"));
        }
    }
    if zero_eigenvalue.norm() > 1e-8 {
        violations.push(format!("k = 0 eigenvalue nearest zero is {zero_eigenvalue:.3e}"));
    }
    if gap <= 0.0 {
        violations.push(format!("zero eigenvalue at k = 0 not simple (next Re λ = {next_re:.3e})"));
    }
    Ok(BlochSpectrum {
        k_grid,
        eigenvalues,
        theta_fit: theta,
        c_g: f64::NAN,
        d_eff: f64::NAN,
        zero_eigenvalue,
        gap,
        max_re_nonzero_k: max_re,
        failed_k,
        violations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalCurve {
    pub c_g: f64,
    #[serde(rename = "D_eff")]
    pub d_eff: f64,
    /// Fitted `λ_wt(0)`.
    pub lambda0: f64,
    /// Sampled `(ν, λ)` pairs along the branch.
    pub samples: Vec<(C, C)>,
}

/// Follows the eigenvalue through 0 along real and imaginary `ν` and fits
/// `λ(ν) = λ₀ + a₁ν + a₂ν² + a₃ν³ + a₄ν⁴` with real coefficients.
pub fn critical_curve(params: &Params, wt: &WaveTrain, nu_samples: &[f64]) -> Result<CriticalCurve> {
    let mut mags: Vec<f64> = nu_samples.iter().map(|v| v.abs()).filter(|v| *v > 0.0).collect();
    mags.sort_by(f64::total_cmp);
    if mags.len() < 2 {
        return Err(Error::InvalidInput("critical curve needs >= 2 nonzero samples".into()));
    }
    let dirs = [C::new(1.0, 0.0), C::new(-1.0, 0.0), C::new(0.0, 1.0), C::new(0.0, -1.0)];
    let branches: Vec<Result<Vec<(C, C)>>> = dirs
        .par_iter()
        .map(|&dir| {
            let mut prev = C::from(0.0);
            let mut out = Vec::with_capacity(mags.len());
            for &s in &mags {
                let nu = dir * s;
                let vals = dense::eigenvalues(&bloch_matrix(params, wt, nu))?;
                let mut idx: Vec<usize> = (0..vals.len()).collect();
                idx.sort_by(|&a, &b| (vals[a] - prev).norm().total_cmp(&(vals[b] - prev).norm()));
                let (best, second) = (vals[idx[0]], vals[idx[1]]);
                if (second - best).norm() < 1e-6 {
                    return Err(Error::BranchAmbiguity { nu: s, gap: (second - best).norm() });
                }
                out.push((nu, best));
                prev = best;
            }
            Ok(out)
        })
        .collect();
    let mut samples = Vec::new();
    for b in branches {
        samples.extend(b?);
    }
    // real least squares on stacked real/imaginary parts
    let nb = 5;
    let mut ata = vec![vec![0.0; nb]; nb];
    let mut atb = vec![0.0; nb];
    for &(nu, lam) in &samples {
        let mut pw = C::from(1.0);
        let mut row = Vec::with_capacity(nb);
        for _ in 0..nb {
            row.push(pw);
            pw *= nu;
        }
        for (part, rhs) in [(0, lam.re), (1, lam.im)] {
            let r: Vec<f64> = row.iter().map(|z| if part == 0 { z.re } else { z.im }).collect();
            for i in 0..nb {
                atb[i] += r[i] * rhs;
                for j in 0..nb {
                    ata[i][j] += r[i] * r[j];
                }
            }
        }
    }
    let piv = banded::dense_lu(&mut ata)?;
    banded::dense_solve(&ata, &piv, &mut atb);
    let (lambda0, a1, a2) = (atb[0], atb[1], atb[2]);
    let d_eff = a2;
    if !(d_eff > 0.0) {
        return Err(Error::HypothesisViolation(format!("D_eff = {d_eff:.3e} is not positive")));
    }
    Ok(CriticalCurve { c_g: -a1, d_eff, lambda0, samples })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdjointGroupVelocity {
    /// `−(2⟨u_ad,₁, ∂ξξu_wt,₁⟩ + c)`, the first-order perturbation of the
    /// critical eigenvalue with `λ = −c_g ν`.
    pub c_g: f64,
    /// `2⟨u_ad,₁, ∂ξξu_wt,₁⟩ + c` as literally printed.
    pub printed_formula_value: f64,
    /// `⟨u_wt', u_ad⟩` after scaling (should be 1).
    pub normalization: f64,
    pub sigma_min: f64,
    pub sigma_next: f64,
    pub u_ad: Vec<f64>,
    pub w_ad: Vec<f64>,
}

/// Group velocity from the kernel of `bloch_matrix(0)ᴴ`, normalized by
/// `⟨u_wt', u_ad⟩ = 1` with the rectangle rule over one period.
pub fn group_velocity_adjoint(params: &Params, wt: &WaveTrain) -> Result<AdjointGroupVelocity> {
    let m = wt.m;
    let b0 = bloch_matrix(params, wt, C::from(0.0));
    let ns = dense::null_vectors(&b0)?;
    let (left, smin, snext, smax) = (ns.left, ns.sigma_min, ns.sigma_next, ns.sigma_max);
    if snext < 1e-8 * smax || smin > 1e-6 * smax {
        return Err(Error::Multiplicity(format!("σ_min = {smin:.3e}, σ_next = {snext:.3e}, σ_max = {smax:.3e}")));
    }
    let (du, dw) = wt.derivative();
    let hq = wt.l / m as f64;
    // `left` spans ker Bᴴ; the real adjoint is its conjugate
    let ad: Vec<C> = left.iter().map(|z| z.conj()).collect();
    let pairing: C = (0..m).map(|i| ad[i] * du[i] + ad[m + i] * dw[i]).sum::<C>() * hq;
    let ad: Vec<C> = ad.iter().map(|z| z / pairing).collect();
    let d = diff_matrix(m);
    let s = 1.0 / wt.l;
    let d2u: Vec<f64> = (0..m)
        .map(|i| (0..m).map(|k| d[i][k] * s * du[k]).sum())
        .collect();
    let p: C = (0..m).map(|i| ad[i] * d2u[i]).sum::<C>() * hq;
    let printed = 2.0 * p.re + wt.c;
    let normalization = ((0..m).map(|i| ad[i] * du[i] + ad[m + i] * dw[i]).sum::<C>() * hq).re;
    Ok(AdjointGroupVelocity {
        c_g: -printed,
        printed_formula_value: printed,
        normalization,
        sigma_min: smin,
        sigma_next: snext,
        u_ad: ad[..m].iter().map(|z| z.re).collect(),
        w_ad: ad[m..].iter().map(|z| z.re).collect(),
    })
}
