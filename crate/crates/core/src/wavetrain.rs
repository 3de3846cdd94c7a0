//! Periodic wave trains by Fourier collocation, the homogeneous oscillation,
//! and the closed-form wavelength quadrature.

use std::f64::consts::{PI, SQRT_2};

use faer::Mat;
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::State;
use crate::interp::CubicSpline;
use crate::linalg::dense;
use crate::model::Params;
use crate::quad;

pub const DEFAULT_M: usize = 256;
pub const MAX_NEWTON: usize = 50;
pub const NEWTON_TOL: f64 = 1e-10;

/// One period of a traveling wave `u(ξ) = U(ξ/L)`, sampled at `σ_j = j/m`
/// (the endpoint `σ = 1` is not repeated).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveTrain {
    pub m: usize,
    pub u: Vec<f64>,
    pub w: Vec<f64>,
    #[serde(rename = "L")]
    pub l: f64,
    pub k_wt: f64,
    pub c: f64,
    pub residual: f64,
}

impl WaveTrain {
    pub fn new(u: Vec<f64>, w: Vec<f64>, l: f64, c: f64) -> Self {
        WaveTrain { m: u.len(), u, w, l, k_wt: 2.0 * PI / l, c, residual: f64::NAN }
    }

    pub fn h(&self) -> f64 {
        self.l / self.m as f64
    }

    pub fn interpolant(&self) -> (TrigInterp, TrigInterp) {
        (TrigInterp::new(&self.u, self.l), TrigInterp::new(&self.w, self.l))
    }

    /// `d/dξ` of both profiles on the collocation points.
    pub fn derivative(&self) -> (Vec<f64>, Vec<f64>) {
        let d = diff_matrix(self.m);
        let s = 1.0 / self.l;
        (matvec(&d, &self.u).into_iter().map(|v| v * s).collect(), matvec(&d, &self.w).into_iter().map(|v| v * s).collect())
    }

    /// Same wave train resampled with `m` points (spectral interpolation).
    pub fn resample(&self, m: usize) -> WaveTrain {
        let (iu, iw) = self.interpolant();
        let xs: Vec<f64> = (0..m).map(|j| j as f64 * self.l / m as f64).collect();
        WaveTrain {
            m,
            u: xs.iter().map(|&x| iu.eval(x)).collect(),
            w: xs.iter().map(|&x| iw.eval(x)).collect(),
            ..self.clone()
        }
    }
}

/// Trigonometric interpolant of `m` equispaced samples over period `l`.
#[derive(Debug, Clone)]
pub struct TrigInterp {
    coef: Vec<Complex64>,
    l: f64,
}

impl TrigInterp {
    pub fn new(y: &[f64], l: f64) -> Self {
        let m = y.len();
        let mut buf: Vec<Complex64> = y.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        FftPlanner::new().plan_fft_forward(m).process(&mut buf);
        for c in &mut buf {
            *c /= m as f64;
        }
        TrigInterp { coef: buf, l }
    }

    fn sum(&self, xi: f64, order: i32) -> f64 {
        let m = self.coef.len();
        let th = 2.0 * PI * xi / self.l;
        let mut s = if order == 0 { self.coef[0].re } else { 0.0 };
        let kmax = (m - 1) / 2;
        let base = Complex64::from_polar(1.0, th);
        let mut e = Complex64::new(1.0, 0.0);
        for k in 1..=kmax {
            e *= base;
            let ik = Complex64::new(0.0, 2.0 * PI * k as f64 / self.l);
            s += 2.0 * (self.coef[k] * ik.powi(order) * e).re;
        }
        if m % 2 == 0 {
            let k = (m / 2) as f64;
            let w = 2.0 * PI * k / self.l;
            let a = self.coef[m / 2].re;
            s += match order.rem_euclid(4) {
                0 => a * (w * xi).cos() * w.powi(order),
                1 => -a * (w * xi).sin() * w.powi(order),
                2 => -a * (w * xi).cos() * w.powi(order),
                _ => a * (w * xi).sin() * w.powi(order),
            };
        }
        s
    }

    pub fn eval(&self, xi: f64) -> f64 {
        self.sum(xi, 0)
    }

    pub fn deriv(&self, xi: f64) -> f64 {
        self.sum(xi, 1)
    }

    pub fn deriv2(&self, xi: f64) -> f64 {
        self.sum(xi, 2)
    }
}

/// Periodic spectral differentiation matrix on `[0,1)` with `m` (even) points.
pub fn diff_matrix(m: usize) -> Vec<Vec<f64>> {
    let mut d = vec![vec![0.0; m]; m];
    for (i, row) in d.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            if i != j {
                let k = i as isize - j as isize;
                let sign = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                *v = PI * sign / (PI * k as f64 / m as f64).tan();
            }
        }
    }
    d
}

fn matvec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter().map(|r| r.iter().zip(x).map(|(p, q)| p * q).sum()).collect()
}

fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut c = vec![vec![0.0; n]; n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i][k];
            if aik != 0.0 {
                for j in 0..n {
                    c[i][j] += aik * b[k][j];
                }
            }
        }
    }
    c
}

fn residual_vec(p: &Params, c: f64, d: &[Vec<f64>], d2: &[Vec<f64>], u: &[f64], w: &[f64], l: f64) -> Vec<f64> {
    let du = matvec(d, u);
    let d2u = matvec(d2, u);
    let dw = matvec(d, w);
    let m = u.len();
    let mut r = vec![0.0; 2 * m];
    for i in 0..m {
        r[i] = d2u[i] / (l * l) + c * du[i] / l + p.f(u[i]) - w[i];
        r[m + i] = c * dw[i] / l + p.eps * (u[i] - p.gamma * w[i]);
    }
    r
}

/// Newton solve of `u''/L² + c u'/L + F(u) = 0` on `σ ∈ [0,1)` for the
/// profiles and `L`, with phase condition `⟨u_guess', u − u_guess⟩ = 0`.
pub fn solve_wavetrain(params: &Params, c: f64, guess: &WaveTrain) -> Result<WaveTrain> {
    let m = guess.m;
    if m < 8 || m % 2 != 0 || guess.u.len() != m || guess.w.len() != m {
        return Err(Error::InvalidInput(format!("wave train needs an even m >= 8, got {m}")));
    }
    if !(guess.l > 0.0) {
        return Err(Error::InvalidInput("guess period must be positive".into()));
    }
    let d = diff_matrix(m);
    let d2 = matmul(&d, &d);
    let gp = matvec(&d, &guess.u);
    let (mut u, mut w, mut l) = (guess.u.clone(), guess.w.clone(), guess.l);
    let n = 2 * m + 1;
    let mut res = f64::INFINITY;
    for it in 0..=MAX_NEWTON {
        let mut r = residual_vec(params, c, &d, &d2, &u, &w, l);
        let phase: f64 = gp.iter().zip(u.iter().zip(&guess.u)).map(|(g, (a, b))| g * (a - b)).sum::<f64>() / m as f64;
        res = r.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if res <= NEWTON_TOL && phase.abs() <= NEWTON_TOL {
            let mut out = WaveTrain::new(u, w, l, c);
            out.residual = res;
            return Ok(out);
        }
        if it == MAX_NEWTON || !res.is_finite() {
            break;
        }
        r.push(phase);
        let du = matvec(&d, &u);
        let d2u = matvec(&d2, &u);
        let dw = matvec(&d, &w);
        let jac = Mat::<f64>::from_fn(n, n, |i, j| {
            if i < m {
                if j < m {
                    d2[i][j] / (l * l) + c * d[i][j] / l + if i == j { params.df(u[i]) } else { 0.0 }
                } else if j < 2 * m {
                    if j - m == i { -1.0 } else { 0.0 }
                } else {
                    -2.0 * d2u[i] / (l * l * l) - c * du[i] / (l * l)
                }
            } else if i < 2 * m {
                let ii = i - m;
                if j < m {
                    if j == ii { params.eps } else { 0.0 }
                } else if j < 2 * m {
                    c * d[ii][j - m] / l - if j - m == ii { params.eps * params.gamma } else { 0.0 }
                } else {
                    -c * dw[ii] / (l * l)
                }
            } else if j < m {
                gp[j] / m as f64
            } else {
                0.0
            }
        });
        let neg: Vec<f64> = r.iter().map(|v| -v).collect();
        let dx = dense::solve(&jac, &neg)?;
        for i in 0..m {
            u[i] += dx[i];
            w[i] += dx[m + i];
        }
        l += dx[2 * m];
        if !(l > 0.0) {
            return Err(Error::NoConvergence { iterations: it + 1, residual: res });
        }
    }
    Err(Error::NoConvergence { iterations: MAX_NEWTON, residual: res })
}

/// Up-crossings of `level` by samples `y` at positions `x`, linearly interpolated.
pub fn upcrossings(x: &[f64], y: &[f64], level: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 0..y.len().saturating_sub(1) {
        if y[i] < level && y[i + 1] >= level {
            let s = (level - y[i]) / (y[i + 1] - y[i]);
            out.push(x[i] + s * (x[i + 1] - x[i]));
        }
    }
    out
}

/// Wave-train guess from the wake of a simulated state: period from the mean
/// spacing of up-crossings through the window mean, one period resampled by
/// splines starting at the first up-crossing.
pub fn wavetrain_from_state(state: &State, window: (f64, f64), c: f64, m: usize) -> Result<WaveTrain> {
    let g = state.grid;
    let idx: Vec<usize> = (0..g.n).filter(|&i| g.x(i) >= window.0 && g.x(i) <= window.1).collect();
    if idx.len() < 4 {
        return Err(Error::WindowTooSmall { crossings: 0 });
    }
    let xs: Vec<f64> = idx.iter().map(|&i| g.x(i)).collect();
    let us: Vec<f64> = idx.iter().map(|&i| state.u[i]).collect();
    let mean = us.iter().sum::<f64>() / us.len() as f64;
    let cr = upcrossings(&xs, &us, mean);
    if cr.len() < 3 {
        return Err(Error::WindowTooSmall { crossings: cr.len() });
    }
    let l = (cr[cr.len() - 1] - cr[0]) / (cr.len() - 1) as f64;
    let su = CubicSpline::uniform(g.x_min, g.h(), &state.u)?;
    let sw = CubicSpline::uniform(g.x_min, g.h(), &state.w)?;
    let x0 = cr[0];
    let u: Vec<f64> = (0..m).map(|j| su.eval(x0 + l * j as f64 / m as f64)).collect();
    let w: Vec<f64> = (0..m).map(|j| sw.eval(x0 + l * j as f64 / m as f64)).collect();
    Ok(WaveTrain::new(u, w, l, c))
}

/// Same as [`wavetrain_from_state`] on the final snapshot of a trajectory.
pub fn wavetrain_from_simulation(
    traj: &crate::stepper::Trajectory,
    window: (f64, f64),
    c: f64,
    m: usize,
) -> Result<WaveTrain> {
    let last = traj.last().ok_or_else(|| Error::InsufficientData("empty trajectory".into()))?;
    wavetrain_from_state(last, window, c, m)
}

/// Periodic orbit of the spatially homogeneous kinetics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Orbit {
    pub t: Vec<f64>,
    pub u: Vec<f64>,
    pub w: Vec<f64>,
    pub period: f64,
}

fn rk4(p: &Params, y: (f64, f64), dt: f64) -> (f64, f64) {
    let f = |(u, w): (f64, f64)| (p.f(u) - w, p.eps * (u - p.gamma * w));
    let k1 = f(y);
    let k2 = f((y.0 + 0.5 * dt * k1.0, y.1 + 0.5 * dt * k1.1));
    let k3 = f((y.0 + 0.5 * dt * k2.0, y.1 + 0.5 * dt * k2.1));
    let k4 = f((y.0 + dt * k3.0, y.1 + dt * k3.1));
    (
        y.0 + dt / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
        y.1 + dt / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
    )
}

/// Integrates the homogeneous ODE from `(0.5, 0)` with RK4 step `dt` and
/// returns one period between consecutive increasing crossings of the mean.
pub fn homogeneous_oscillation(params: &Params, dt: f64) -> Result<Orbit> {
    let t_skip = 40.0 / params.eps;
    let t_probe = 20.0 / params.eps;
    let mut y = (0.5, 0.0);
    let n_skip = (t_skip / dt).round() as usize;
    for _ in 0..n_skip {
        y = rk4(params, y, dt);
    }
    let n_probe = (t_probe / dt).round() as usize;
    let mut probe = Vec::with_capacity(n_probe);
    for _ in 0..n_probe {
        y = rk4(params, y, dt);
        probe.push(y);
    }
    let (lo, hi) = probe.iter().fold((f64::MAX, f64::MIN), |(a, b), p| (a.min(p.0), b.max(p.0)));
    if !(hi - lo > 1e-6) {
        return Err(Error::Regime(format!("trajectory settles (u range {:.2e})", hi - lo)));
    }
    let mean = probe.iter().map(|p| p.0).sum::<f64>() / probe.len() as f64;
    // cubic Hermite root of u(t) = mean on a step, using u' from the vector field
    let crossing = |a: (f64, f64), b: (f64, f64), t0: f64| -> f64 {
        let ua = a.0 - mean;
        let ub = b.0 - mean;
        let da = (params.f(a.0) - a.1) * dt;
        let db = (params.f(b.0) - b.1) * dt;
        let herm = |s: f64| {
            let (s2, s3) = (s * s, s * s * s);
            (2.0 * s3 - 3.0 * s2 + 1.0) * ua + (s3 - 2.0 * s2 + s) * da + (-2.0 * s3 + 3.0 * s2) * ub + (s3 - s2) * db
        };
        let (mut l, mut r) = (0.0, 1.0);
        for _ in 0..60 {
            let mid = 0.5 * (l + r);
            if herm(l) * herm(mid) <= 0.0 {
                r = mid;
            } else {
                l = mid;
            }
        }
        t0 + 0.5 * (l + r) * dt
    };
    let mut t = 0.0;
    let mut prev = y;
    let mut hits: Vec<f64> = Vec::new();
    let mut samples: Vec<(f64, f64, f64)> = Vec::new();
    let n_max = (4.0 * t_probe / dt) as usize;
    for _ in 0..n_max {
        let next = rk4(params, prev, dt);
        if prev.0 < mean && next.0 >= mean {
            hits.push(crossing(prev, next, t));
            if hits.len() == 2 {
                break;
            }
        }
        if hits.len() == 1 {
            samples.push((t + dt, next.0, next.1));
        }
        prev = next;
        t += dt;
    }
    if hits.len() < 2 {
        return Err(Error::Regime("no recurrent crossing of the mean".into()));
    }
    let period = hits[1] - hits[0];
    Ok(Orbit {
        t: samples.iter().map(|s| s.0 - hits[0]).collect(),
        u: samples.iter().map(|s| s.1).collect(),
        w: samples.iter().map(|s| s.2).collect(),
        period,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitConvention {
    /// `u_{j,±} = (1 − 2a ± j√(1+a+a²))/3`.
    Printed,
    /// `√(1−a+a²)`, the critical points of the cubic.
    CriticalPoints,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WavelengthQuadrature {
    pub l_minus: f64,
    pub l_plus: f64,
    /// `[[u_{1,−}, u_{2,−}], [u_{1,+}, u_{2,+}]]`.
    pub limits: [[f64; 2]; 2],
    pub convention: LimitConvention,
}

impl WavelengthQuadrature {
    pub fn sum(&self) -> f64 {
        self.l_minus + self.l_plus
    }
}

pub fn quadrature_limits(a: f64, conv: LimitConvention) -> [[f64; 2]; 2] {
    let r = match conv {
        LimitConvention::Printed => (1.0 + a + a * a).sqrt(),
        LimitConvention::CriticalPoints => (1.0 - a + a * a).sqrt(),
    };
    let u = |j: f64, s: f64| (1.0 - 2.0 * a + s * j * r) / 3.0;
    [[u(1.0, -1.0), u(2.0, -1.0)], [u(1.0, 1.0), u(2.0, 1.0)]]
}

/// `L± = ∫_{u_{1,±}}^{u_{2,±}} (1+a) f'(u) / (√2 (γ f(u) − u)) du`.
pub fn wavelength_quadrature(params: &Params) -> Result<WavelengthQuadrature> {
    wavelength_quadrature_with(params, LimitConvention::Printed, 1e-10)
}

pub fn wavelength_quadrature_with(params: &Params, conv: LimitConvention, tol: f64) -> Result<WavelengthQuadrature> {
    let p = *params;
    let den = move |u: f64| p.gamma * p.f(u) - u;
    let g = move |u: f64| (1.0 + p.a) * p.df(u) / (SQRT_2 * den(u));
    let limits = quadrature_limits(p.a, conv);
    let mut out = [0.0; 2];
    for (k, lim) in limits.iter().enumerate() {
        let (a, b) = (lim[0].min(lim[1]), lim[0].max(lim[1]));
        // sign of the denominator at Chebyshev points (endpoints included)
        let nodes = 64;
        let mut prev: Option<(f64, f64)> = None;
        for j in 0..=nodes {
            let x = 0.5 * (a + b) + 0.5 * (b - a) * (PI * j as f64 / nodes as f64).cos();
            let v = den(x);
            if v == 0.0 {
                return Err(Error::SingularIntegrand { at: x });
            }
            if let Some((px, pv)) = prev {
                if pv.signum() != v.signum() {
                    return Err(Error::SingularIntegrand { at: 0.5 * (px + x) });
                }
            }
            prev = Some((x, v));
        }
        out[k] = quad::integrate(g, lim[0], lim[1], tol)?;
    }
    Ok(WavelengthQuadrature { l_minus: out[0], l_plus: out[1], limits, convention: conv })
}
