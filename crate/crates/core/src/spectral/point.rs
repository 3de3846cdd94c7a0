//! Point spectrum of the front linearization in doubly weighted spaces and
//! the adjoint functional `P_tr`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{line_fit, LineFit};
use crate::front::FrontProfile;
use crate::grid::Grid;
use crate::interp::gradient;
use crate::linalg::arnoldi;
use crate::linalg::banded::BandMatrix;
use crate::model::Params;
use crate::weight::Weight;
use num_complex::Complex64 as C;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointSpectrumOptions {
    pub xi_min: f64,
    pub xi_max: f64,
    pub h: f64,
    pub krylov: usize,
    pub inverse_iterations: usize,
}

impl Default for PointSpectrumOptions {
    fn default() -> Self {
        PointSpectrumOptions { xi_min: -300.0, xi_max: 150.0, h: 0.05, krylov: 40, inverse_iterations: 6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSpectrumReport {
    pub eta: f64,
    pub eta0: f64,
    pub grid: Grid,
    pub eigenvalue_nearest_zero: C,
    pub next_eigenvalue: C,
    /// `−Re` of the next eigenvalue.
    pub gap: f64,
    /// Angle between the eigenfunction and `ω_{η,0}ω₀u_ps'`.
    pub angle: f64,
    pub eigenfunction_u: Vec<f64>,
    pub eigenfunction_w: Vec<f64>,
    /// `ψ_ad` (for the `ω₀`-weighted operator), components `u`, `w`.
    pub adjoint_u: Vec<f64>,
    pub adjoint_w: Vec<f64>,
    pub ptr_normalization_check: f64,
    pub ritz_values: Vec<C>,
}

/// Interleaved `(u_i, w_i)` band matrix of `ω·𝓐_ps(·/ω)` with Dirichlet ends,
/// where `ω` is the product of the given weights.
pub fn weighted_operator(grid: &Grid, u_ps: &[f64], params: &Params, c: f64, weights: &[Weight]) -> BandMatrix {
    let n = grid.n;
    let h = grid.h();
    let mut a = BandMatrix::zeros(2 * n, 2, 2);
    for i in 0..n {
        let xi = grid.x(i);
        let (p1, p2) = weights.iter().fold((0.0, 0.0), |(s1, s2), w| {
            let (_, d1, d2) = w.log_derivs(xi);
            (s1 + d1, s2 + d2)
        });
        let adv = c - 2.0 * p1;
        let (ru, rw) = (2 * i, 2 * i + 1);
        a.set(ru, ru, -2.0 / (h * h) + p1 * p1 - p2 - c * p1 + params.df(u_ps[i]));
        a.set(ru, rw, -1.0);
        a.set(rw, ru, params.eps);
        a.set(rw, rw, -c * p1 - params.eps * params.gamma);
        if i > 0 {
            a.set(ru, ru - 2, 1.0 / (h * h) - adv / (2.0 * h));
            a.set(rw, rw - 2, -c / (2.0 * h));
        }
        if i + 1 < n {
            a.set(ru, ru + 2, 1.0 / (h * h) + adv / (2.0 * h));
            a.set(rw, rw + 2, c / (2.0 * h));
        }
    }
    a
}

fn trapezoid_dot(a: &[f64], b: &[f64], h: f64) -> f64 {
    let n = a.len();
    let mut s: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    if n > 1 {
        s -= 0.5 * (a[0] * b[0] + a[n - 1] * b[n - 1]);
    }
    s * h
}

/// Eigenvalues nearest 0 of `ω_{η,0}ω₀·𝓐_ps(·/(ω_{η,0}ω₀))`, the matching
/// eigenfunction, and `ψ_ad` normalized by `⟨ω₀u_ps', ψ_ad⟩ = 1`.
pub fn front_point_spectrum(
    fp: &FrontProfile,
    params: &Params,
    eta: f64,
    eta0: f64,
    opts: &PointSpectrumOptions,
) -> Result<PointSpectrumReport> {
    // truncated to the extracted profile's domain
    let lo = opts.xi_min.max(fp.grid.x_min);
    let hi = opts.xi_max.min(fp.grid.x_max);
    let n_cells = ((hi - lo) / opts.h).floor();
    let grid = Grid::with_spacing(lo, lo + n_cells * opts.h, opts.h)?;
    let prof = fp.resample(grid)?;
    let n = grid.n;
    let h = grid.h();
    let om0 = Weight::omega0(eta0);
    let ome = Weight::new(eta, 0.0);
    let a = weighted_operator(&grid, &prof.u, params, fp.c_ps, &[om0, ome]);
    let lu = a.lu()?;
    let (du, dw) = prof.derivative();
    let w0 = om0.sample(&grid);
    let we = ome.sample(&grid);
    // ω_{η,0}ω₀u_ps' in interleaved order
    let mut target = vec![0.0; 2 * n];
    for i in 0..n {
        target[2 * i] = we[i] * w0[i] * du[i];
        target[2 * i + 1] = we[i] * w0[i] * dw[i];
    }
    let start: Vec<f64> = (0..2 * n).map(|k| target[k] + 1e-3 * (1.0 + (k as f64 * 0.618).sin())).collect();
    let pairs = arnoldi::shift_invert(2 * n, 0.0, opts.krylov, &start, |x| lu.solve_in_place(x))?;
    let converged: Vec<&arnoldi::RitzPair> = pairs.iter().filter(|p| p.residual < 1e-6 * (1.0 + p.value.norm())).collect();
    let first = *converged.first().ok_or_else(|| Error::Solver("no converged Ritz pair".into()))?;
    let lambda = first.value;
    if lambda.norm() > 1e-2 {
        return Err(Error::HypothesisViolation(format!("nearest eigenvalue {lambda:.3e} is not near 0")));
    }
    let next = converged
        .iter()
        .skip(1)
        .map(|p| p.value)
        .max_by(|x, y| x.re.total_cmp(&y.re))
        .unwrap_or(C::new(f64::NEG_INFINITY, 0.0));
    // real eigenfunction: rotate so the largest entry is real
    let imax = (0..2 * n).max_by(|&i, &j| first.vector[i].norm().total_cmp(&first.vector[j].norm())).unwrap();
    let rot = first.vector[imax].conj() / first.vector[imax].norm();
    let v: Vec<f64> = first.vector.iter().map(|z| (z * rot).re).collect();
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>();
    let cosang = dot(&v, &target).abs() / (dot(&v, &v).sqrt() * dot(&target, &target).sqrt());
    let angle = cosang.min(1.0).acos();
    // left eigenvector by inverse iteration with the transposed factorization
    let lut = a.transpose().lu()?;
    let mut l = target.clone();
    for _ in 0..opts.inverse_iterations.max(1) {
        lut.solve_in_place(&mut l);
        let nrm = dot(&l, &l).sqrt();
        if !(nrm > 0.0 && nrm.is_finite()) {
            return Err(Error::Solver("inverse iteration broke down".into()));
        }
        for x in &mut l {
            *x /= nrm;
        }
    }
    // left eigenvector of ω_{η,0}𝓛_ps ω_{η,0}⁻¹ times ω_{η,0} is ψ_ad for 𝓛_ps
    let mut psi_u: Vec<f64> = (0..n).map(|i| we[i] * l[2 * i]).collect();
    let mut psi_w: Vec<f64> = (0..n).map(|i| we[i] * l[2 * i + 1]).collect();
    let up0: Vec<f64> = (0..n).map(|i| w0[i] * du[i]).collect();
    let wp0: Vec<f64> = (0..n).map(|i| w0[i] * dw[i]).collect();
    let pairing = trapezoid_dot(&up0, &psi_u, h) + trapezoid_dot(&wp0, &psi_w, h);
    if pairing == 0.0 || !pairing.is_finite() {
        return Err(Error::Solver("adjoint orthogonal to the translational mode".into()));
    }
    for x in psi_u.iter_mut().chain(psi_w.iter_mut()) {
        *x /= pairing;
    }
    let check = (trapezoid_dot(&up0, &psi_u, h) + trapezoid_dot(&wp0, &psi_w, h) - 1.0).abs();
    Ok(PointSpectrumReport {
        eta,
        eta0,
        grid,
        eigenvalue_nearest_zero: lambda,
        next_eigenvalue: next,
        gap: -next.re,
        angle,
        eigenfunction_u: (0..n).map(|i| v[2 * i]).collect(),
        eigenfunction_w: (0..n).map(|i| v[2 * i + 1]).collect(),
        adjoint_u: psi_u,
        adjoint_w: psi_w,
        ptr_normalization_check: check,
        ritz_values: pairs.iter().map(|p| p.value).collect(),
    })
}

/// `P_tr f = ⟨f, ψ_ad⟩` (trapezoid rule on the report grid).
pub fn ptr(f_u: &[f64], f_w: &[f64], report: &PointSpectrumReport) -> Result<f64> {
    let n = report.grid.n;
    for len in [f_u.len(), f_w.len()] {
        if len != n {
            return Err(Error::GridMismatch { expected: n, got: len });
        }
    }
    let h = report.grid.h();
    Ok(trapezoid_dot(f_u, &report.adjoint_u, h) + trapezoid_dot(f_w, &report.adjoint_w, h))
}

/// `ω₀u_ps'` on the report grid, the function paired to 1 by `ψ_ad`.
pub fn weighted_translation_mode(fp: &FrontProfile, report: &PointSpectrumReport) -> Result<(Vec<f64>, Vec<f64>)> {
    let prof = fp.resample(report.grid)?;
    let h = report.grid.h();
    let w0 = Weight::omega0(report.eta0).sample(&report.grid);
    let du = gradient(&prof.u, h);
    let dw = gradient(&prof.w, h);
    Ok((du.iter().zip(&w0).map(|(a, b)| a * b).collect(), dw.iter().zip(&w0).map(|(a, b)| a * b).collect()))
}

/// Log-linear fits of `|ψ_ad|` on `[lo₋, hi₋]` and `[lo₊, hi₊]`.
pub fn adjoint_tail_fits(report: &PointSpectrumReport, left: (f64, f64), right: (f64, f64)) -> Result<(LineFit, LineFit)> {
    let g = report.grid;
    let mag: Vec<f64> = report.adjoint_u.iter().zip(&report.adjoint_w).map(|(a, b)| a.abs() + b.abs()).collect();
    let fit = |(lo, hi): (f64, f64)| -> Result<LineFit> {
        let (xs, ys): (Vec<f64>, Vec<f64>) = (0..g.n)
            .filter(|&i| g.x(i) >= lo && g.x(i) <= hi && mag[i] > 0.0)
            .map(|i| (g.x(i), mag[i].ln()))
            .unzip();
        line_fit(&xs, &ys)
    };
    Ok((fit(left)?, fit(right)?))
}

/// Exponential localization rates `(κ₋, κ₊)` of `|ψ_ad|`, both positive when
/// `ψ_ad` decays toward each end.
pub fn adjoint_tail_rates(report: &PointSpectrumReport, left: (f64, f64), right: (f64, f64)) -> Result<(f64, f64)> {
    let (l, r) = adjoint_tail_fits(report, left, right)?;
    Ok((l.slope, -r.slope))
}
