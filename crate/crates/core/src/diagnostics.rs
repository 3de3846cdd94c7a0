//! Measurements on trajectories: wake wavenumber, local phase, defect
//! speed, decay fits, light-cone misfits and the asymptotic phase.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::line_fit;
use crate::grid::{Grid, State};
use crate::interp::{gradient, linear, CubicSpline};
use crate::wavetrain::{upcrossings, WaveTrain};
use crate::weight::Weight;

/// Coefficient of variation of crossing spacings above which a wake is
/// reported as non-coherent.
pub const COHERENCE_CV: f64 = 0.1;
pub const MIN_CORRELATION: f64 = 0.5;
/// Fraction of the run (from the end) read by trailing-window fits.
pub const TRAILING_FRACTION: f64 = 0.6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Wavenumber {
    pub k: f64,
    pub crossings: usize,
    /// Standard deviation of spacings over their mean.
    pub spacing_cv: f64,
    pub coherent: bool,
}

/// `2π` over the mean spacing of up-crossings through the window mean.
pub fn measure_wavenumber(state: &State, window: (f64, f64)) -> Result<Wavenumber> {
    let g = state.grid;
    let (xs, us): (Vec<f64>, Vec<f64>) =
        (0..g.n).filter(|&i| g.x(i) >= window.0 && g.x(i) <= window.1).map(|i| (g.x(i), state.u[i])).unzip();
    if xs.len() < 4 {
        return Err(Error::WindowTooSmall { crossings: 0 });
    }
    let mean = us.iter().sum::<f64>() / us.len() as f64;
    let cr = upcrossings(&xs, &us, mean);
    if cr.len() < 4 {
        return Err(Error::WindowTooSmall { crossings: cr.len() });
    }
    let sp: Vec<f64> = cr.windows(2).map(|w| w[1] - w[0]).collect();
    let mean_sp = (cr[cr.len() - 1] - cr[0]) / sp.len() as f64;
    let var = sp.iter().map(|s| (s - mean_sp).powi(2)).sum::<f64>() / sp.len() as f64;
    let cv = var.sqrt() / mean_sp;
    Ok(Wavenumber { k: 2.0 * PI / mean_sp, crossings: cr.len(), spacing_cv: cv, coherent: cv <= COHERENCE_CV })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseProfile {
    /// Positions the local phases are attributed to.
    pub xi: Vec<f64>,
    /// Unwrapped phase `ψ` with `u(ξ) ≈ u_wt(ξ + ψ(ξ))`.
    pub psi: Vec<f64>,
    /// Normalized correlation peak per window.
    pub coherence: Vec<f64>,
}

/// Local phase by sliding one-period correlation against the wave train.
///
/// For each window start `x₀` (every `stride` samples) one period of `u` is
/// resampled onto the wave-train points, the circular correlation peak is
/// located by FFT and refined by Newton on the trigonometric interpolant,
/// and the phase is attributed to the `|u_wt'|²`-weighted centroid of the
/// window.
pub fn extract_phase(state: &State, wt: &WaveTrain, window: (f64, f64), stride: usize) -> Result<PhaseProfile> {
    let g = state.grid;
    let l = wt.l;
    let m = wt.m;
    if window.1 - window.0 < l {
        return Err(Error::InvalidInput("phase window shorter than one period".into()));
    }
    let su = CubicSpline::uniform(g.x_min, g.h(), &state.u)?;
    let (iu, _) = wt.interpolant();
    let umean = wt.u.iter().sum::<f64>() / m as f64;
    let uc: Vec<f64> = wt.u.iter().map(|v| v - umean).collect();
    let unorm = uc.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(m);
    let inv = planner.plan_fft_inverse(m);
    let mut spec_u: Vec<Complex64> = uc.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fwd.process(&mut spec_u);
    let hs = l / m as f64;
    let starts: Vec<f64> = (0..g.n)
        .step_by(stride.max(1))
        .map(|i| g.x(i))
        .filter(|&x| x >= window.0 && x + l <= window.1 && x + l <= g.x_max)
        .collect();
    let mut xi = Vec::with_capacity(starts.len());
    let mut raw = Vec::with_capacity(starts.len());
    let mut coh = Vec::with_capacity(starts.len());
    for &x0 in &starts {
        let seg: Vec<f64> = (0..m).map(|j| su.eval(x0 + j as f64 * hs)).collect();
        let smean = seg.iter().sum::<f64>() / m as f64;
        let sc: Vec<f64> = seg.iter().map(|v| v - smean).collect();
        let snorm = sc.iter().map(|v| v * v).sum::<f64>().sqrt();
        if snorm == 0.0 {
            return Err(Error::LowCoherence { peak: 0.0 });
        }
        // C(s) = Σ_j seg_j U_{j+s} = IFFT(conj(FFT seg)·FFT U)
        let mut buf: Vec<Complex64> = sc.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fwd.process(&mut buf);
        for (b, u) in buf.iter_mut().zip(&spec_u) {
            *b = b.conj() * u;
        }
        inv.process(&mut buf);
        let corr: Vec<f64> = buf.iter().map(|z| z.re / m as f64).collect();
        let jmax = (0..m).max_by(|&a, &b| corr[a].total_cmp(&corr[b])).unwrap();
        let peak = corr[jmax] / (snorm * unorm);
        if peak < MIN_CORRELATION {
            return Err(Error::LowCoherence { peak });
        }
        let (cm, c0, cp) = (corr[(jmax + m - 1) % m], corr[jmax], corr[(jmax + 1) % m]);
        let den = cm - 2.0 * c0 + cp;
        let mut s = (jmax as f64 + if den < 0.0 { 0.5 * (cm - cp) / den } else { 0.0 }) * hs;
        // Newton on C'(s) = Σ seg_j U'(σ_j + s)
        for _ in 0..8 {
            let (mut d1, mut d2) = (0.0, 0.0);
            for (j, v) in sc.iter().enumerate() {
                let y = j as f64 * hs + s;
                d1 += v * iu.deriv(y);
                d2 += v * iu.deriv2(y);
            }
            if d2 >= 0.0 {
                break;
            }
            let ds = -d1 / d2;
            s += ds.clamp(-hs, hs);
            if ds.abs() < 1e-12 * l {
                break;
            }
        }
        let mut wsum = 0.0;
        let mut xsum = 0.0;
        for j in 0..m {
            let y = j as f64 * hs;
            let q = iu.deriv(y + s).powi(2);
            wsum += q;
            xsum += q * y;
        }
        xi.push(x0 + xsum / wsum);
        raw.push(s - x0);
        coh.push(peak);
    }
    if raw.is_empty() {
        return Err(Error::WindowTooSmall { crossings: 0 });
    }
    // nearest-branch unwrapping modulo L
    let mut psi = Vec::with_capacity(raw.len());
    let mut prev = raw[0] - l * (raw[0] / l).round();
    psi.push(prev);
    for &r in &raw[1..] {
        let k = ((prev - r) / l).round();
        prev = r + k * l;
        psi.push(prev);
    }
    // attribution can reorder neighbours slightly; keep the output sorted
    let mut idx: Vec<usize> = (0..xi.len()).collect();
    idx.sort_by(|&a, &b| xi[a].total_cmp(&xi[b]));
    Ok(PhaseProfile {
        xi: idx.iter().map(|&i| xi[i]).collect(),
        psi: idx.iter().map(|&i| psi[i]).collect(),
        coherence: idx.iter().map(|&i| coh[i]).collect(),
    })
}

/// Phase of a small perturbation `v` of a base state with profile `u_b`:
/// one-period box averages of `v·u_b'` over `u_b'²`, attributed to the
/// `u_b'²`-weighted centroid, then resampled on `out`.
pub fn linearized_phase(grid: &Grid, u_base: &[f64], v: &[f64], period: f64, out: &[f64]) -> Result<Vec<f64>> {
    let n = grid.n;
    if u_base.len() != n || v.len() != n {
        return Err(Error::GridMismatch { expected: n, got: v.len().min(u_base.len()) });
    }
    let h = grid.h();
    let up = gradient(u_base, h);
    let box_len = (period / h).round() as usize;
    if box_len < 2 || box_len > n {
        return Err(Error::InvalidInput("period does not fit the grid".into()));
    }
    // boxes summed directly: running sums leave roundoff where u_b' vanishes
    let w2: Vec<f64> = up.iter().map(|d| d * d).collect();
    let sums: Vec<(f64, f64, f64)> = (0..=n - box_len)
        .map(|i| {
            (i..i + box_len).fold((0.0, 0.0, 0.0), |(a, b, c), j| (a + v[j] * up[j], b + w2[j], c + grid.x(j) * w2[j]))
        })
        .collect();
    let den_max = sums.iter().map(|s| s.1).fold(0.0, f64::max);
    let (xs, ps): (Vec<f64>, Vec<f64>) =
        sums.iter().filter(|s| s.1 > 1e-8 * den_max).map(|&(num, den, cen)| (cen / den, num / den)).unzip();
    if xs.is_empty() {
        return Err(Error::InvalidInput("base profile is flat".into()));
    }
    let mut pairs: Vec<(f64, f64)> = xs.into_iter().zip(ps).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (xs, ps): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    if out.iter().any(|&x| x < xs[0] || x > xs[xs.len() - 1]) {
        return Err(Error::InvalidInput("output grid leaves the attributed range".into()));
    }
    Ok(out.iter().map(|&x| linear(&xs, &ps, x)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseTrajectory {
    pub t: Vec<f64>,
    pub xi: Vec<f64>,
    pub psi: Vec<Vec<f64>>,
}

/// Phases of `states` on `xi_out`, minus the phase of `baseline` when given.
/// Differences are taken on the branch that is closest to zero at the left
/// end of the window.
pub fn phase_trajectory(
    states: &[State],
    baseline: Option<&State>,
    wt: &WaveTrain,
    window: (f64, f64),
    stride: usize,
    xi_out: &[f64],
) -> Result<PhaseTrajectory> {
    let sample = |s: &State| -> Result<Vec<f64>> {
        let p = extract_phase(s, wt, window, stride)?;
        if xi_out.iter().any(|&x| x < p.xi[0] || x > p.xi[p.xi.len() - 1]) {
            return Err(Error::InvalidInput("phase output grid leaves the attributed range".into()));
        }
        Ok(xi_out.iter().map(|&x| linear(&p.xi, &p.psi, x)).collect())
    };
    let base = baseline.map(sample).transpose()?;
    let mut psi = Vec::with_capacity(states.len());
    for s in states {
        let mut v = sample(s)?;
        if let Some(b) = &base {
            for (a, b) in v.iter_mut().zip(b) {
                *a -= b;
            }
            let shift = wt.l * (v[0] / wt.l).round();
            v.iter_mut().for_each(|a| *a -= shift);
        }
        psi.push(v);
    }
    Ok(PhaseTrajectory { t: states.iter().map(|s| s.t).collect(), xi: xi_out.to_vec(), psi })
}

/// `(sup|ψ_ξ|, ‖ψ_ξ‖_{L²})` per record of a phase trajectory on a uniform grid.
pub fn phase_gradient_norms(traj: &PhaseTrajectory) -> Vec<(f64, f64)> {
    let h = if traj.xi.len() > 1 { traj.xi[1] - traj.xi[0] } else { 1.0 };
    traj.psi
        .iter()
        .map(|p| {
            let g = gradient(p, h);
            let sup = g.iter().map(|v| v.abs()).fold(0.0, f64::max);
            let l2 = (g.iter().map(|v| v * v).sum::<f64>() * h).sqrt();
            (sup, l2)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefectTrack {
    pub speed: f64,
    pub stderr: f64,
    pub t: Vec<f64>,
    pub position: Vec<f64>,
    /// True when the defect left the phase window before the end.
    pub truncated: bool,
}

/// Slope of the mid-level crossing of `ψ` (halfway between its values at the
/// two ends of the window) against `t`, over the trailing window.
pub fn defect_speed(traj: &PhaseTrajectory) -> Result<DefectTrack> {
    let mut ts = Vec::new();
    let mut pos = Vec::new();
    let n = traj.xi.len();
    if n < 3 {
        return Err(Error::InsufficientData("phase window too short".into()));
    }
    let mut truncated = false;
    for (t, psi) in traj.t.iter().zip(&traj.psi) {
        let (left, right) = (psi[0], psi[n - 1]);
        let jump = right - left;
        let scale = psi.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if jump.abs() <= 1e-3 * scale.max(1e-300) || scale == 0.0 {
            if !ts.is_empty() {
                truncated = true;
            }
            continue;
        }
        let level = 0.5 * (left + right);
        let mut found = None;
        for i in (0..n - 1).rev() {
            let (a, b) = (psi[i] - level, psi[i + 1] - level);
            if a == 0.0 || a * b < 0.0 {
                found = Some(traj.xi[i] + a / (a - b) * (traj.xi[i + 1] - traj.xi[i]));
                break;
            }
        }
        match found {
            Some(x) => {
                ts.push(*t);
                pos.push(x);
            }
            None if !ts.is_empty() => truncated = true,
            None => {}
        }
    }
    let t_end = traj.t.last().copied().unwrap_or(0.0);
    let t_lo = t_end * (1.0 - TRAILING_FRACTION);
    let (tw, pw): (Vec<f64>, Vec<f64>) = ts.iter().zip(&pos).filter(|(t, _)| **t >= t_lo).map(|(a, b)| (*a, *b)).unzip();
    if tw.len() < 10 {
        return Err(Error::InsufficientData(format!("defect tracked in {} trailing snapshots (< 10)", tw.len())));
    }
    let f = line_fit(&tw, &pw)?;
    Ok(DefectTrack { speed: f.slope, stderr: f.stderr, t: ts, position: pos, truncated })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecayKind {
    /// `value ∝ (1+t)^p`.
    Algebraic,
    /// `value ∝ e^{μt}`.
    Exponential,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub kind: DecayKind,
    pub exponent_or_rate: f64,
    pub window: (f64, f64),
    pub r2: f64,
    /// Nonpositive samples dropped inside the window.
    pub dropped: usize,
}

/// Log-linear fit over the trailing 60% of the time span.
pub fn decay_fit(times: &[f64], values: &[f64], kind: DecayKind) -> Result<DecayFit> {
    let (t0, t1) = match (times.first(), times.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return Err(Error::InsufficientData("empty series".into())),
    };
    decay_fit_window(times, values, kind, (t1 - TRAILING_FRACTION * (t1 - t0), t1))
}

pub fn decay_fit_window(times: &[f64], values: &[f64], kind: DecayKind, window: (f64, f64)) -> Result<DecayFit> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut dropped = 0;
    for (&t, &v) in times.iter().zip(values) {
        if t < window.0 || t > window.1 {
            continue;
        }
        if !(v > 0.0) || !v.is_finite() {
            dropped += 1;
            continue;
        }
        xs.push(match kind {
            DecayKind::Algebraic => (1.0 + t).ln(),
            DecayKind::Exponential => t,
        });
        ys.push(v.ln());
    }
    if xs.len() < 10 {
        return Err(Error::InsufficientData(format!("{} positive samples in window (< 10)", xs.len())));
    }
    let f = line_fit(&xs, &ys)?;
    Ok(DecayFit { kind, exponent_or_rate: f.slope, window, r2: f.r2, dropped })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LightCones {
    pub t: Vec<f64>,
    /// `sup_{ξ ≥ (c_g+δ_c)t} ω₀|u − u_ps(ξ+ψ∞)|`.
    pub right: Vec<f64>,
    /// `sup_{ξ ≤ (c_g−δ_c)t} |u − u_ps|`.
    pub left: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeOptions {
    pub c_g: f64,
    pub delta_c: f64,
    pub eta0: f64,
    /// Time at which the perturbation was applied.
    pub t0: f64,
    /// Right end of the right cone (where the reference profile is resolved).
    pub xi_max: f64,
}

/// Light-cone misfits of each snapshot against comoving reference profiles
/// on the same grid: either one reference for all snapshots or one per
/// snapshot (an unperturbed run recorded at the same times). Entries with an
/// empty cone are skipped.
pub fn lightcone_norms(snapshots: &[State], references: &[State], psi_inf: f64, opts: &ConeOptions) -> Result<LightCones> {
    if !(opts.c_g + opts.delta_c < 0.0) || !(opts.delta_c > 0.0) {
        return Err(Error::InvalidInput("light cones need δ_c > 0 and c_g + δ_c < 0".into()));
    }
    if references.len() != 1 && references.len() != snapshots.len() {
        return Err(Error::InvalidInput("need one reference or one per snapshot".into()));
    }
    let g = references[0].grid;
    let w0 = Weight::omega0(opts.eta0);
    let mut out = LightCones { t: Vec::new(), right: Vec::new(), left: Vec::new() };
    let mut splines = None;
    for (j, s) in snapshots.iter().enumerate() {
        let reference = &references[j.min(references.len() - 1)];
        if s.grid != g || reference.grid != g {
            return Err(Error::GridMismatch { expected: g.n, got: s.grid.n });
        }
        let t = s.t - opts.t0;
        if t <= 0.0 {
            continue;
        }
        if references.len() > 1 || splines.is_none() {
            splines = Some((
                CubicSpline::uniform(g.x_min, g.h(), &reference.u)?,
                CubicSpline::uniform(g.x_min, g.h(), &reference.w)?,
            ));
        }
        let (su, sw) = splines.as_ref().expect("set above");
        let (xr, xl) = ((opts.c_g + opts.delta_c) * t, (opts.c_g - opts.delta_c) * t);
        let (mut right, mut left) = (None::<f64>, None::<f64>);
        for i in 0..g.n {
            let x = g.x(i);
            if x >= xr && x <= opts.xi_max {
                let y = x + psi_inf;
                if y >= g.x_min && y <= g.x_max {
                    let d = (s.u[i] - su.eval(y)).abs().max((s.w[i] - sw.eval(y)).abs());
                    right = Some(right.unwrap_or(0.0).max(w0.eval(x) * d));
                }
            }
            if x <= xl {
                let d = (s.u[i] - reference.u[i]).abs().max((s.w[i] - reference.w[i]).abs());
                left = Some(left.unwrap_or(0.0).max(d));
            }
        }
        if let (Some(r), Some(l)) = (right, left) {
            out.t.push(t);
            out.right.push(r);
            out.left.push(l);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticPhase {
    pub measured: f64,
    pub misfit: f64,
    pub predicted: f64,
}

/// Shift `s` minimizing `sup_{−K ≤ ξ ≤ ξ_max} ω₀|u(ξ) − u_ref(ξ+s)|` over
/// `|s| ≤ s_max`, where `u_ref` is the unperturbed comoving profile.
pub fn measure_phase_shift(
    state: &State,
    reference: &State,
    eta0: f64,
    k: f64,
    xi_max: f64,
    s_max: f64,
) -> Result<(f64, f64)> {
    let g = reference.grid;
    if state.grid != g {
        return Err(Error::GridMismatch { expected: g.n, got: state.grid.n });
    }
    let su = CubicSpline::uniform(g.x_min, g.h(), &reference.u)?;
    let w0 = Weight::omega0(eta0);
    let idx: Vec<usize> = (0..g.n).filter(|&i| g.x(i) >= -k && g.x(i) <= xi_max).collect();
    let wts: Vec<f64> = idx.iter().map(|&i| w0.eval(g.x(i))).collect();
    let misfit = |s: f64| -> f64 {
        idx.iter().zip(&wts).map(|(&i, w)| w * (state.u[i] - su.eval(g.x(i) + s)).abs()).fold(0.0, f64::max)
    };
    let n_scan = 400;
    let step = 2.0 * s_max / n_scan as f64;
    let vals: Vec<(f64, f64)> = (0..=n_scan).map(|j| -s_max + j as f64 * step).map(|s| (s, misfit(s))).collect();
    let (lo_v, hi_v) = vals.iter().fold((f64::MAX, f64::MIN), |(a, b), v| (a.min(v.1), b.max(v.1)));
    if hi_v - lo_v <= 1e-12 * hi_v.max(1e-300) {
        return Err(Error::PhaseUndetermined);
    }
    let jbest = (0..vals.len()).min_by(|&a, &b| vals[a].1.total_cmp(&vals[b].1)).unwrap();
    // golden section inside the bracketing scan cell pair
    let (mut a, mut b) = (vals[jbest].0 - step, vals[jbest].0 + step);
    let gr = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - gr * (b - a);
    let mut d = a + gr * (b - a);
    let (mut fc, mut fd) = (misfit(c), misfit(d));
    while b - a > 1e-10 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = misfit(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = misfit(d);
        }
    }
    let s = 0.5 * (a + b);
    Ok((s, misfit(s)))
}
