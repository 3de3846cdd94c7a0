//! Viscous eikonal equation `ψ_t = D_eff ψ_ξξ − c_g ψ_ξ + β ψ_ξ²` and the
//! error-function phase profile.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::linalg::banded::{BandLu, BandMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EikonalConfig {
    #[serde(rename = "D_eff")]
    pub d_eff: f64,
    pub c_g: f64,
    #[serde(default)]
    pub beta: f64,
    pub grid: Grid,
    pub dt: f64,
}

impl EikonalConfig {
    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if !(self.d_eff > 0.0) {
            return Err(Error::InvalidParams(format!("D_eff = {} must be positive", self.d_eff)));
        }
        if !(self.dt > 0.0) || !self.c_g.is_finite() || !self.beta.is_finite() {
            return Err(Error::InvalidInput("dt must be positive, c_g and beta finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EikonalTrajectory {
    pub grid: Grid,
    pub t: Vec<f64>,
    pub psi: Vec<Vec<f64>>,
}

/// `D∂² − c_g∂` with mirror ghosts at both ends.
fn operator(cfg: &EikonalConfig) -> BandMatrix {
    let n = cfg.grid.n;
    let h = cfg.grid.h();
    let mut a = BandMatrix::zeros(n, 1, 1);
    let (dd, aa) = (cfg.d_eff / (h * h), -cfg.c_g / (2.0 * h));
    for i in 0..n {
        a.set(i, i, -2.0 * dd);
        if i == 0 {
            a.set(0, 1, 2.0 * dd);
        } else if i == n - 1 {
            a.set(i, i - 1, 2.0 * dd);
        } else {
            a.set(i, i - 1, dd - aa);
            a.set(i, i + 1, dd + aa);
        }
    }
    a
}

fn gradient_sq(psi: &[f64], h: f64, out: &mut [f64]) {
    let n = psi.len();
    out[0] = 0.0;
    out[n - 1] = 0.0;
    for i in 1..n - 1 {
        let g = (psi[i + 1] - psi[i - 1]) / (2.0 * h);
        out[i] = g * g;
    }
}

/// Crank–Nicolson for the linear part, Heun for `βψ_ξ²`, Neumann ends.
/// Records the initial field and every `record_every` steps.
pub fn eikonal_run(psi0: &[f64], cfg: &EikonalConfig, t_end: f64, record_every: usize) -> Result<EikonalTrajectory> {
    cfg.validate()?;
    let n = cfg.grid.n;
    if psi0.len() != n {
        return Err(Error::GridMismatch { expected: n, got: psi0.len() });
    }
    if psi0.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("initial phase is not finite".into()));
    }
    let h = cfg.grid.h();
    let dt = cfg.dt;
    let a = operator(cfg);
    let mut lhs = a.clone();
    lhs.scale_shift(-0.5 * dt, 1.0);
    let lhs = BandLu::factor(&lhs)?;
    let mut rhs = a;
    rhs.scale_shift(0.5 * dt, 1.0);
    let steps = (t_end / dt).round() as usize;
    let every = record_every.max(1);
    let mut psi = psi0.to_vec();
    let mut out = EikonalTrajectory { grid: cfg.grid, t: vec![0.0], psi: vec![psi.clone()] };
    let (mut b, mut q1, mut q2, mut star) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for step in 0..steps {
        rhs.matvec(&psi, &mut b);
        if cfg.beta != 0.0 {
            gradient_sq(&psi, h, &mut q1);
            for i in 0..n {
                star[i] = b[i] + dt * cfg.beta * q1[i];
            }
            lhs.solve_in_place(&mut star);
            gradient_sq(&star, h, &mut q2);
            for i in 0..n {
                psi[i] = b[i] + 0.5 * dt * cfg.beta * (q1[i] + q2[i]);
            }
        } else {
            psi.copy_from_slice(&b);
        }
        lhs.solve_in_place(&mut psi);
        if psi.iter().any(|v| !v.is_finite()) {
            return Err(Error::Blowup { step: step + 1, t: (step + 1) as f64 * dt });
        }
        if (step + 1) % every == 0 {
            out.t.push((step + 1) as f64 * dt);
            out.psi.push(psi.clone());
        }
    }
    Ok(out)
}

/// `∫_{−∞}^z e^{−w²} dw`, which tends to `√π` as `z → ∞`.
pub fn erf_unnormalized(z: f64) -> f64 {
    0.5 * PI.sqrt() * libm::erfc(-z)
}

/// `offset + amplitude·erf((ξ − c_g t)/√(D₀(1+t)))` with the unnormalized erf.
pub fn erf_profile(xi: f64, t: f64, c_g: f64, d0: f64, amplitude: f64, offset: f64) -> f64 {
    offset + amplitude * erf_unnormalized((xi - c_g * t) / (d0 * (1.0 + t)).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErfFit {
    pub d0: f64,
    pub amplitude: f64,
    pub offset: f64,
    /// Shift of the center from `c_g t` (zero unless fitted).
    pub center_shift: f64,
    /// RMS misfit.
    pub residual: f64,
}

impl ErfFit {
    pub fn center(&self, t: f64, c_g: f64) -> f64 {
        c_g * t + self.center_shift
    }
}

/// Amplitude and offset by linear least squares for a fixed shape.
fn linear_part(xs: &[f64], ys: &[f64], shape: impl Fn(f64) -> f64) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let (mut sg, mut sgg, mut sy, mut sgy) = (0.0, 0.0, 0.0, 0.0);
    let g: Vec<f64> = xs.iter().map(|&x| shape(x)).collect();
    for (gi, yi) in g.iter().zip(ys) {
        sg += gi;
        sgg += gi * gi;
        sy += yi;
        sgy += gi * yi;
    }
    let det = n * sgg - sg * sg;
    if det.abs() < 1e-300 {
        return (0.0, sy / n, f64::INFINITY);
    }
    let amp = (n * sgy - sg * sy) / det;
    let off = (sy - amp * sg) / n;
    let rss: f64 = g.iter().zip(ys).map(|(gi, yi)| (off + amp * gi - yi).powi(2)).sum();
    (amp, off, (rss / n).sqrt())
}

/// Nelder–Mead on a small number of variables.
fn nelder_mead(f: impl Fn(&[f64]) -> f64, x0: &[f64], step: &[f64], iters: usize) -> (Vec<f64>, f64) {
    let d = x0.len();
    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..d {
        let mut x = x0.to_vec();
        x[i] += step[i];
        simplex.push(x);
    }
    let mut vals: Vec<f64> = simplex.iter().map(|x| f(x)).collect();
    for _ in 0..iters {
        let mut idx: Vec<usize> = (0..=d).collect();
        idx.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        simplex = idx.iter().map(|&i| simplex[i].clone()).collect();
        vals = idx.iter().map(|&i| vals[i]).collect();
        if (vals[d] - vals[0]).abs() <= 1e-15 * (1.0 + vals[0].abs()) {
            break;
        }
        let centroid: Vec<f64> = (0..d).map(|j| simplex[..d].iter().map(|x| x[j]).sum::<f64>() / d as f64).collect();
        let along = |t: f64| -> Vec<f64> { (0..d).map(|j| centroid[j] + t * (simplex[d][j] - centroid[j])).collect() };
        let xr = along(-1.0);
        let fr = f(&xr);
        if fr < vals[0] {
            let xe = along(-2.0);
            let fe = f(&xe);
            if fe < fr {
                simplex[d] = xe;
                vals[d] = fe;
            } else {
                simplex[d] = xr;
                vals[d] = fr;
            }
        } else if fr < vals[d - 1] {
            simplex[d] = xr;
            vals[d] = fr;
        } else {
            let xc = if fr < vals[d] { along(-0.5) } else { along(0.5) };
            let fc = f(&xc);
            if fc < vals[d].min(fr) {
                simplex[d] = xc;
                vals[d] = fc;
            } else {
                for i in 1..=d {
                    simplex[i] = (0..d).map(|j| simplex[0][j] + 0.5 * (simplex[i][j] - simplex[0][j])).collect();
                    vals[i] = f(&simplex[i]);
                }
            }
        }
    }
    let best = (0..=d).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap();
    (simplex[best].clone(), vals[best])
}

/// Least-squares fit of [`erf_profile`] to `phase` sampled at `xs`, with
/// amplitude and offset solved exactly for each trial `D₀` (and center shift
/// when `free_center`).
pub fn fit_erf(xs: &[f64], phase: &[f64], t: f64, c_g: f64, free_center: bool) -> Result<ErfFit> {
    if xs.len() != phase.len() || xs.len() < 5 {
        return Err(Error::InsufficientData("erf fit needs >= 5 samples".into()));
    }
    let span = xs[xs.len() - 1] - xs[0];
    let eval = |p: &[f64]| -> (f64, f64, f64) {
        let d0 = p[0].exp();
        let shift = if free_center { p[1] } else { 0.0 };
        let s = (d0 * (1.0 + t)).sqrt();
        linear_part(xs, phase, |x| erf_unnormalized((x - c_g * t - shift) / s))
    };
    let obj = |p: &[f64]| eval(p).2;
    // coarse scan over log D₀ (and shift) for a starting point
    let mut best = (vec![0.0, 0.0], f64::INFINITY);
    let shifts: Vec<f64> = if free_center { (-10..=10).map(|i| 0.05 * span * i as f64).collect() } else { vec![0.0] };
    for k in -12..=12 {
        for &sh in &shifts {
            let p = vec![0.5 * k as f64, sh];
            let v = obj(&p);
            if v < best.1 {
                best = (p, v);
            }
        }
    }
    let x0 = if free_center { best.0.clone() } else { vec![best.0[0]] };
    let step = if free_center { vec![0.3, 0.02 * span] } else { vec![0.3] };
    let (p, _) = nelder_mead(obj, &x0, &step, 2000);
    let (amp, off, res) = eval(&p);
    let rms = (phase.iter().map(|v| v * v).sum::<f64>() / phase.len() as f64).sqrt();
    if !res.is_finite() || amp == 0.0 {
        return Err(Error::FitFailed { residual: res });
    }
    if res > 0.5 * rms.max(1e-300) && res > 0.5 * (amp.abs() * PI.sqrt()) {
        return Err(Error::FitFailed { residual: res });
    }
    Ok(ErfFit {
        d0: p[0].exp(),
        amplitude: amp,
        offset: off,
        center_shift: if free_center { p[1] } else { 0.0 },
        residual: res,
    })
}
