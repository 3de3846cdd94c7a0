//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero when any criterion fails.
//!
//! Golden rasters live in `tests/golden/`; run with `INVASIONLAB_BLESS=1` to
//! rewrite them.

use std::path::{Path, PathBuf};
use std::time::Instant;

use invasionlab::commands::{self, Ctx};
use invasionlab::io::{read_snapshot, write_heatmap, write_snapshot, RunManifest};
use invasionlab_core::diagnostics::{
    decay_fit, defect_speed, lightcone_norms, linearized_phase, measure_phase_shift, measure_wavenumber,
    phase_gradient_norms, phase_trajectory, ConeOptions, DecayKind, PhaseTrajectory,
};
use invasionlab_core::eikonal::{eikonal_run, fit_erf, EikonalConfig};
use invasionlab_core::fit::line_fit;
use invasionlab_core::front::{default_level, front_position};
use invasionlab_core::model::{jacobian, reaction};
use invasionlab_core::spectral::point::adjoint_tail_fits;
use invasionlab_core::spectral::{
    bloch_sweep, critical_curve, front_point_spectrum, group_velocity_adjoint, linear_spreading_speed, ptr,
    PointSpectrumOptions,
};
use invasionlab_core::wavetrain::{
    solve_wavetrain, wavelength_quadrature, wavelength_quadrature_with, wavetrain_from_state, LimitConvention,
    DEFAULT_M,
};
use invasionlab_core::{Bc, FrontProfile, Grid, Params, SchemeConfig, State, Stepper, Trajectory, Weight};
use invasionlab_experiments::{
    comoving_base, comoving_run, continue_wavetrain, front_speed, gaussian, linearized_run, standard_run, StandardRun,
};

type Outcome = Result<(bool, String), String>;

fn e<T: std::fmt::Display>(err: T) -> String {
    err.to_string()
}

struct Ledger {
    lines: Vec<(usize, &'static str, bool, String)>,
}

impl Ledger {
    fn record(&mut self, id: usize, name: &'static str, outcome: Outcome) {
        let (ok, detail) = outcome.unwrap_or_else(|err| (false, format!("error: {err}")));
        println!("criterion {id:>2} {} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
        self.lines.push((id, name, ok, detail));
    }
}

/// Everything computed from the standard lab run.
struct Lab {
    params: Params,
    run: StandardRun,
    wt: invasionlab_core::WaveTrain,
    p: f64,
    c_lin: f64,
    eta_lin: f64,
}

fn lab() -> Result<Lab, String> {
    let params = Params::default();
    let run = standard_run(&params).map_err(e)?;
    let last = run.traj.last().ok_or("empty trajectory")?;
    let p = front_position(last, default_level(&params)).map_err(e)?;
    let guess = wavetrain_from_state(last, (p - 300.0, p - 20.0), run.front.c_ps, DEFAULT_M).map_err(e)?;
    let wt = solve_wavetrain(&params, run.front.c_ps, &guess).map_err(e)?;
    let s = linear_spreading_speed(&params).map_err(e)?;
    Ok(Lab { params, run, wt, p, c_lin: s.c_lin, eta_lin: s.eta_lin })
}

fn criterion_1(lab: &Lab) -> Outcome {
    let c = lab.run.front.c_ps;
    let target = 1.1 / 2f64.sqrt();
    let ok = (c - target).abs() <= 0.05 && lab.run.seconds <= 300.0 && c > lab.c_lin;
    Ok((ok, format!("c_ps = {c:.5} (target {target:.5} ± 0.05), c_lin = {:.5}, runtime {:.1} s", lab.c_lin, lab.run.seconds)))
}

fn criterion_2(lab: &Lab) -> Outcome {
    let eta = lab.run.front.eta_ps;
    let target = 0.9 / 2f64.sqrt();
    let ok = (eta - target).abs() <= 0.05 && (lab.eta_lin - 0.3).abs() <= 0.02 && lab.eta_lin < eta;
    Ok((ok, format!("eta_ps = {eta:.5} (target {target:.5} ± 0.05), eta_lin = {:.5} (target 0.3 ± 0.02)", lab.eta_lin)))
}

fn criterion_3(lab: &Lab) -> Outcome {
    let last = lab.run.traj.last().ok_or("empty trajectory")?;
    let k = measure_wavenumber(last, (lab.p - 300.0, lab.p - 20.0)).map_err(e)?.k;
    let k_ok = (k / lab.wt.k_wt - 1.0).abs() <= 0.02;

    let speeds: Vec<f64> = {
        use rayon::prelude::*;
        [0.005, 0.02]
            .par_iter()
            .map(|&eps| front_speed(&Params { eps, ..lab.params }))
            .collect::<invasionlab_core::Result<_>>()
            .map_err(e)?
    };
    let mut rows = vec![(0.01, lab.wt.l)];
    for (eps, c) in [0.005, 0.02].into_iter().zip(speeds) {
        rows.push((eps, continue_wavetrain(&lab.params, &lab.wt, eps, c, 10).map_err(e)?.l));
    }
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut detail = format!("k = {k:.6} vs k_wt = {:.6};", lab.wt.k_wt);
    let mut ok = k_ok;
    let mut devs = Vec::new();
    for &(eps, l) in &rows {
        let p = Params { eps, ..lab.params };
        let printed = wavelength_quadrature(&p).map_err(e)?.sum();
        let critical = wavelength_quadrature_with(&p, LimitConvention::CriticalPoints, 1e-10).map_err(e)?.sum();
        let bound = 3.0 * eps.cbrt();
        let dev = (eps * l - printed).abs();
        ok &= dev <= bound;
        devs.push(dev);
        detail += &format!(
            " eps {eps}: L = {l:.3}, eps·L = {:.4}, L-+L+ = {printed:.4} (critical points {critical:.4}), dev {dev:.4} ≤ {bound:.4};",
            eps * l
        );
    }
    let trend = devs.windows(2).all(|w| w[0] < w[1]);
    ok &= trend;
    detail += &format!(" deviation increasing in eps: {trend}");
    Ok((ok, detail))
}

fn criterion_4(lab: &Lab) -> Outcome {
    let clock = Instant::now();
    let bs = bloch_sweep(&lab.params, &lab.wt, 64).map_err(e)?;
    let secs = clock.elapsed().as_secs_f64();
    let ok = bs.zero_eigenvalue.norm() <= 1e-8
        && bs.max_re_nonzero_k < 0.0
        && bs.theta_fit > 0.0
        && bs.failed_k.is_empty()
        && secs <= 600.0;
    Ok((
        ok,
        format!(
            "|λ(0)| = {:.2e}, max Re (k ≠ 0) = {:.3e}, θ = {:.4e}, gap = {:.4e}, m = {}, {:.1} s",
            bs.zero_eigenvalue.norm(),
            bs.max_re_nonzero_k,
            bs.theta_fit,
            bs.gap,
            lab.wt.m,
            secs
        ),
    ))
}

fn criterion_5(lab: &Lab) -> Result<(bool, String, f64), String> {
    let cc = critical_curve(&lab.params, &lab.wt, &[1e-3, 2e-3, 4e-3, 8e-3]).map_err(e)?;
    let ad = group_velocity_adjoint(&lab.params, &lab.wt).map_err(e)?;
    let rel = (cc.c_g - ad.c_g).abs() / cc.c_g.abs();
    let ok = rel <= 1e-3 && cc.c_g < 0.0 && ad.c_g < 0.0 && cc.d_eff > 0.0;
    Ok((ok, format!("c_g = {:.6} (branch), {:.6} (adjoint), rel {rel:.2e}, D_eff = {:.5}", cc.c_g, ad.c_g, cc.d_eff), cc.c_g))
}

fn criterion_6(lab: &Lab, eta0: f64) -> Outcome {
    let r = front_point_spectrum(&lab.run.front, &lab.params, 0.1, eta0, &PointSpectrumOptions::default()).map_err(e)?;
    let (l, rt) = adjoint_tail_fits(&r, (-150.0, -60.0), (20.0, 60.0)).map_err(e)?;
    let lam = r.eigenvalue_nearest_zero;
    let ok = lam.norm() <= 5e-3
        && r.angle <= 1e-2
        && r.next_eigenvalue.re < 0.0
        && l.slope > 0.0
        && -rt.slope > 0.0
        && r.ptr_normalization_check <= 1e-6;
    Ok((
        ok,
        format!(
            "λ = {:.2e}{:+.2e}i, angle = {:.2e}, next Re = {:.4e}, ψ_ad rates {:.4} (R² {:.3}) / {:.4} (R² {:.3}), normalization {:.1e}",
            lam.re,
            lam.im,
            r.angle,
            r.next_eigenvalue.re,
            l.slope,
            l.r2,
            -rt.slope,
            rt.r2,
            r.ptr_normalization_check
        ),
    ))
}

/// Comoving restart of the standard run's final state.
struct Comoving {
    base: State,
    g0: Vec<f64>,
    xi_r: f64,
}

fn comoving(lab: &Lab) -> Result<Comoving, String> {
    let last = lab.run.traj.last().ok_or("empty trajectory")?;
    let base = comoving_base(last, &lab.params, -620.0, 150.0).map_err(e)?;
    let g0 = gaussian(&base.grid, 3.0, 3.0);
    let i = base.u.iter().rposition(|v| v.abs() >= 1e-6).ok_or("flat base")?;
    Ok(Comoving { xi_r: base.grid.x(i), base, g0 })
}

fn uniform(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    (0..n).map(|i| lo + step * i as f64).collect()
}

/// Criteria 8 and 11 from one linearized run.
fn linear_criteria(lab: &Lab, cm: &Comoving, c_g: f64) -> Result<(Outcome, Outcome), String> {
    let c = lab.run.front.c_ps;
    let traj = linearized_run(&cm.base, &lab.params, c, &cm.g0, 0.1, 800.0).map_err(e)?;
    let out = uniform(-580.0, -20.0, 0.5);
    let mut pt = PhaseTrajectory { t: Vec::new(), xi: out.clone(), psi: Vec::new() };
    for s in &traj.snapshots {
        pt.t.push(s.t);
        pt.psi.push(linearized_phase(&cm.base.grid, &cm.base.u, &s.u, lab.wt.l, &out).map_err(e)?);
    }

    let c8 = (|| -> Outcome {
        let norms = phase_gradient_norms(&pt);
        let sup: Vec<f64> = norms.iter().map(|n| n.0).collect();
        let l2: Vec<f64> = norms.iter().map(|n| n.1).collect();
        let fs = decay_fit(&pt.t, &sup, DecayKind::Algebraic).map_err(e)?;
        let fl = decay_fit(&pt.t, &l2, DecayKind::Algebraic).map_err(e)?;
        let ok = (-0.65..=-0.35).contains(&fs.exponent_or_rate) && (-0.45..=-0.10).contains(&fl.exponent_or_rate);
        Ok((
            ok,
            format!(
                "sup|ψ_ξ| ~ t^{:.3} (R² {:.3}), ‖ψ_ξ‖_L2 ~ t^{:.3} (R² {:.3}) over t ∈ [{:.0}, {:.0}]",
                fs.exponent_or_rate, fs.r2, fl.exponent_or_rate, fl.r2, fs.window.0, fs.window.1
            ),
        ))
    })();

    let c11 = (|| -> Outcome {
        let i200 = pt.t.iter().position(|&t| (t - 200.0).abs() < 1e-6).ok_or("no record at t = 200")?;
        let f = fit_erf(&out, &pt.psi[i200], 200.0, c_g, true).map_err(e)?;
        let (mut ts, mut xs) = (Vec::new(), Vec::new());
        for (t, psi) in pt.t.iter().zip(&pt.psi).filter(|(t, _)| **t >= 200.0) {
            let fi = fit_erf(&out, psi, *t, c_g, true).map_err(e)?;
            ts.push(*t);
            xs.push(fi.center(*t, c_g));
        }
        let speed = line_fit(&ts, &xs).map_err(e)?.slope;
        let ok = f.residual <= 0.1 * f.amplitude.abs() && (speed - c_g).abs() <= 0.1 * c_g.abs();
        Ok((
            ok,
            format!(
                "t = 200: D₀ = {:.3}, amplitude = {:.4e}, residual = {:.3e}; center speed {speed:.4} vs c_g {c_g:.4}",
                f.d0, f.amplitude, f.residual
            ),
        ))
    })();
    Ok((c8, c11))
}

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("golden")
}

/// Byte comparison against a stored raster, or rewrite when blessing.
fn golden(name: &str, snapshots: &[State], scratch: &Path) -> Result<(bool, String), String> {
    let fresh = scratch.join(name);
    write_heatmap(&fresh, snapshots).map_err(e)?;
    let bytes = std::fs::read(&fresh).map_err(e)?;
    let stored = golden_dir().join(name);
    if std::env::var_os("INVASIONLAB_BLESS").is_some_and(|v| v == "1") {
        std::fs::create_dir_all(golden_dir()).map_err(e)?;
        std::fs::write(&stored, &bytes).map_err(e)?;
        return Ok((true, format!("{name} blessed")));
    }
    match std::fs::read(&stored) {
        Ok(b) if b == bytes => Ok((true, format!("{name} matches"))),
        Ok(_) => Ok((false, format!("{name} differs from golden"))),
        Err(_) => Ok((false, format!("{name} has no golden raster"))),
    }
}

/// Criteria 7, 9 and 10 from the nonlinear comoving runs.
fn nonlinear_criteria(lab: &Lab, cm: &Comoving, c_g: f64, eta0: f64) -> Result<[Outcome; 3], String> {
    use rayon::prelude::*;
    let c = lab.run.front.c_ps;
    let amps = [0.0, 0.05, 0.1, 0.2];
    let runs: Vec<Trajectory> = amps
        .par_iter()
        .map(|&a| comoving_run(&cm.base, &lab.params, c, &cm.g0, a, 700.0))
        .collect::<invasionlab_core::Result<_>>()
        .map_err(e)?;
    let reference = runs[0].last().ok_or("empty reference run")?;
    let finals: Vec<&State> = runs.iter().map(|r| r.last().expect("recorded")).collect();
    let psi_inf: Vec<f64> = finals[1..]
        .iter()
        .map(|s| measure_phase_shift(s, reference, eta0, 50.0, cm.xi_r, 10.0).map(|r| r.0))
        .collect::<invasionlab_core::Result<_>>()
        .map_err(e)?;
    let a01 = &runs[2].snapshots;

    let c10 = (|| -> Outcome {
        let fp = FrontProfile {
            grid: cm.base.grid,
            u: cm.base.u.clone(),
            w: cm.base.w.clone(),
            c_ps: c,
            eta_ps: lab.run.front.eta_ps,
            alignment_residual: 0.0,
        };
        let opts = PointSpectrumOptions { xi_min: cm.base.grid.x_min, xi_max: cm.base.grid.x_max, h: 0.1, ..Default::default() };
        let r = front_point_spectrum(&fp, &lab.params, 0.1, eta0, &opts).map_err(e)?;
        let w0 = Weight::omega0(eta0);
        let f_u: Vec<f64> = r.grid.xs().iter().map(|&x| w0.eval(x) * (-((x - 3.0) / 3.0).powi(2)).exp()).collect();
        let p1 = ptr(&f_u, &vec![0.0; r.grid.n], &r).map_err(e)?;
        let diffs: Vec<f64> = amps[1..].iter().zip(&psi_inf).map(|(a, s)| (s - a * p1).abs()).collect();
        let lx: Vec<f64> = amps[1..].iter().map(|a| a.ln()).collect();
        let ly: Vec<f64> = diffs.iter().map(|d| d.ln()).collect();
        let slope = line_fit(&lx, &ly).map_err(e)?.slope;
        Ok((
            (slope - 2.0).abs() <= 0.5,
            format!("P_tr(ω₀g) = {p1:.4}, ψ∞ = {psi_inf:.4?}, |ψ∞ − A·P_tr| = {diffs:.4?}, log-log slope {slope:.3}"),
        ))
    })();

    let c7 = (|| -> Outcome {
        // attribution lands anywhere within one period of the window start
        let xi_out = uniform((-580.0 + lab.wt.l).ceil(), (-20.0 - lab.wt.l).floor(), 0.5);
        let pt = phase_trajectory(a01, Some(reference), &lab.wt, (-580.0, -20.0), 10, &xi_out).map_err(e)?;
        let d = defect_speed(&pt).map_err(e)?;
        let speed_ok = (d.speed - c_g).abs() <= 0.1 * c_g.abs();
        let scratch = tempfile::tempdir().map_err(e)?;
        let (g1, m1) = golden("lab.pgm", &lab.run.traj.snapshots, scratch.path())?;
        let (g2, m2) = golden("comoving.pgm", a01, scratch.path())?;
        Ok((
            speed_ok && g1 && g2,
            format!("defect speed {:.4} ± {:.4} vs c_g {c_g:.4}{}; {m1}; {m2}", d.speed, d.stderr, if d.truncated { " (truncated)" } else { "" }),
        ))
    })();

    let c9 = (|| -> Outcome {
        let opts = ConeOptions { c_g, delta_c: 0.5 * c_g.abs(), eta0, t0: 0.0, xi_max: cm.xi_r };
        let cones = lightcone_norms(a01, &runs[0].snapshots, psi_inf[1], &opts).map_err(e)?;
        let r = decay_fit(&cones.t, &cones.right, DecayKind::Exponential).map_err(e)?;
        let l = decay_fit(&cones.t, &cones.left, DecayKind::Algebraic).map_err(e)?;
        let ok = r.exponent_or_rate <= -0.01 && r.r2 >= 0.9 && l.exponent_or_rate <= 0.0;
        Ok((
            ok,
            format!(
                "right cone rate {:.4} (R² {:.3}), left cone exponent {:.3} (R² {:.3})",
                r.exponent_or_rate, r.r2, l.exponent_or_rate, l.r2
            ),
        ))
    })();
    Ok([c7, c9, c10])
}

/// `exp(M t)` for a 2×2 matrix by scaling and squaring of the Taylor series.
fn expm2(m: [[f64; 2]; 2], t: f64) -> [[f64; 2]; 2] {
    let mul = |a: [[f64; 2]; 2], b: [[f64; 2]; 2]| {
        let mut c = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        c
    };
    let s = 20;
    let scale = t / f64::powi(2.0, s);
    let a = [[m[0][0] * scale, m[0][1] * scale], [m[1][0] * scale, m[1][1] * scale]];
    let mut sum = [[1.0, 0.0], [0.0, 1.0]];
    let mut term = sum;
    for k in 1..20 {
        term = mul(term, a);
        term.iter_mut().flatten().for_each(|v| *v /= k as f64);
        sum.iter_mut().flatten().zip(term.iter().flatten()).for_each(|(s, t)| *s += t);
    }
    for _ in 0..s {
        sum = mul(sum, sum);
    }
    sum
}

fn criterion_12() -> Outcome {
    let mut detail = Vec::new();
    let mut ok = true;

    // the rest state at the defaults, and the constant states of γ = 10
    // (u = 0.4 ± √0.15), which lies outside the validated range since for
    // γ < 4 the rest state is the only equilibrium; the stepper accepts it
    let grid = Grid::new(-20.0, 20.0, 401).map_err(e)?;
    let g10 = Params { gamma: 10.0, ..Params::default() };
    let cases = [
        (Params::default(), 0.0),
        (g10, 0.0),
        (g10, 0.4 - 0.15f64.sqrt()),
        (g10, 0.4 + 0.15f64.sqrt()),
    ];
    let mut worst: f64 = 0.0;
    for (p, u0) in cases {
        for bc in [Bc::Neumann, Bc::Periodic] {
            for c in [0.0, 0.7] {
                let cfg = SchemeConfig { dt: 0.02, frame_speed: c, bc, record_every: 1, t_end: 1.0 };
                let mut st = Stepper::new(grid, p, &cfg).map_err(e)?;
                let (mut u, mut w) = (vec![u0; grid.n], vec![u0 / p.gamma; grid.n]);
                for _ in 0..50 {
                    let (pu, pw) = (u.clone(), w.clone());
                    st.advance(&mut u, &mut w);
                    let d = u.iter().zip(&pu).chain(w.iter().zip(&pw)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                    worst = worst.max(d);
                }
            }
        }
    }
    ok &= worst <= 1e-13;
    detail.push(format!("equilibrium drift {worst:.1e}/step"));

    // Fourier modes about the rest state on a periodic domain of length 100
    let params = Params::default();
    let grid = Grid::new(0.0, 99.9, 1000).map_err(e)?;
    let period = grid.n as f64 * grid.h();
    let mut worst: f64 = 0.0;
    for j in [2, 8] {
        let k = 2.0 * std::f64::consts::PI * j as f64 / period;
        let delta = 1e-9;
        let t_end = 40.0;
        let cfg = SchemeConfig { dt: 0.02, frame_speed: 0.0, bc: Bc::Periodic, record_every: 2000, t_end };
        let init = State::from_fn(grid, |x| (delta * (k * x).cos(), 0.0));
        let traj = Stepper::new(grid, params, &cfg).map_err(e)?.run(&init, &cfg, &[]).map_err(e)?;
        let last = traj.last().ok_or("empty run")?;
        let proj = |v: &[f64]| 2.0 / grid.n as f64 * v.iter().enumerate().map(|(i, y)| y * (k * grid.x(i)).cos()).sum::<f64>() / delta;
        let m = [[-k * k + params.a * (1.0 - params.a), -1.0], [params.eps, -params.eps * params.gamma]];
        let ex = expm2(m, last.t);
        let got = [proj(&last.u), proj(&last.w)];
        let err = ((got[0] - ex[0][0]).powi(2) + (got[1] - ex[1][0]).powi(2)).sqrt() / ex[0][0].hypot(ex[1][0]);
        worst = worst.max(err);
    }
    ok &= worst <= 1e-3;
    detail.push(format!("Fourier symbol rel err {worst:.1e}"));

    // Jacobian against central differences
    let mut worst: f64 = 0.0;
    for &(u, w) in &[(-0.3, 0.1), (0.0, 0.0), (0.2, -0.05), (0.7, 0.3), (1.1, 0.5)] {
        let jac = jacobian(&params, u, w);
        let hs = 1e-6;
        let du = |s: f64| reaction(&params, u + s, w);
        let dw = |s: f64| reaction(&params, u, w + s);
        let (up, um, wp, wm) = (du(hs), du(-hs), dw(hs), dw(-hs));
        let fd = [[(up.0 - um.0) / (2.0 * hs), (wp.0 - wm.0) / (2.0 * hs)], [(up.1 - um.1) / (2.0 * hs), (wp.1 - wm.1) / (2.0 * hs)]];
        let scale = jac.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max);
        let d = jac.iter().flatten().zip(fd.iter().flatten()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        worst = worst.max(d / scale);
    }
    ok &= worst <= 1e-6;
    detail.push(format!("jacobian rel err {worst:.1e}"));

    // β = 0 eikonal against the advected heat kernel of a smoothed step
    let cfg = EikonalConfig { d_eff: 1.0, c_g: -0.5, beta: 0.0, grid: Grid::new(-300.0, 60.0, 1441).map_err(e)?, dt: 0.05 };
    let exact = |x: f64, t: f64| 0.5 * libm::erfc((x - cfg.c_g * t) / (4.0 * cfg.d_eff * (t + 1.0)).sqrt());
    let psi0: Vec<f64> = cfg.grid.xs().iter().map(|&x| exact(x, 0.0)).collect();
    let tr = eikonal_run(&psi0, &cfg, 100.0, 400).map_err(e)?;
    let mut worst: f64 = 0.0;
    for (t, psi) in tr.t.iter().zip(&tr.psi) {
        for (x, v) in cfg.grid.xs().iter().zip(psi) {
            worst = worst.max((v - exact(*x, *t)).abs());
        }
    }
    ok &= worst <= 1e-2;
    detail.push(format!("eikonal vs heat kernel {worst:.1e}"));

    // snapshot round trip
    let dir = tempfile::tempdir().map_err(e)?;
    let g = Grid::new(-1.0, 1.0, 7).map_err(e)?;
    let s = State {
        grid: g,
        t: 1.0 / 3.0,
        u: vec![0.1, -0.0, f64::MIN_POSITIVE, 5e-324, 1e300, -std::f64::consts::PI, 2.0f64.sqrt()],
        w: vec![1.0 / 7.0, 0.0, -1e-310, f64::MAX, f64::EPSILON, -0.5, 123456.789],
    };
    let path = dir.path().join("s.bin");
    write_snapshot(&path, &s).map_err(e)?;
    let back = read_snapshot(&path).map_err(e)?;
    let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    let rt = back.grid == s.grid && back.t.to_bits() == s.t.to_bits() && bits(&back.u) == bits(&s.u) && bits(&back.w) == bits(&s.w);
    ok &= rt;
    detail.push(format!("snapshot round trip bit-exact: {rt}"));

    // fixed-seed reruns
    let cfg_path = dir.path().join("noise.json");
    std::fs::write(
        &cfg_path,
        r#"{"params": {"a": 0.1, "gamma": 2.0, "eps": 0.01},
            "grid": {"x_min": -50.0, "x_max": 50.0, "n": 1001},
            "scheme": {"dt": 0.02, "frame_speed": 0.0, "bc": "neumann", "record_every": 100, "t_end": 10.0},
            "init": {"kind": "noise", "amplitude": 0.05, "seed": 3}}"#,
    )
    .map_err(e)?;
    let mut manifests = Vec::new();
    for name in ["a", "b"] {
        let ctx = Ctx { out: dir.path().join(name), seed: Some(42) };
        commands::simulate(&cfg_path, &ctx).map_err(e)?;
        manifests.push((RunManifest::load(&ctx.out).map_err(e)?, ctx.out));
    }
    let same = manifests[0].0.files == manifests[1].0.files
        && manifests[0].0.files.iter().all(|f| {
            std::fs::read(manifests[0].1.join(&f.path)).ok() == std::fs::read(manifests[1].1.join(&f.path)).ok()
        });
    ok &= same;
    detail.push(format!("fixed-seed reruns identical: {same}"));

    Ok((ok, detail.join(", ")))
}

fn main() {
    let mut ledger = Ledger { lines: Vec::new() };
    let names = [
        "front speed",
        "tail rate",
        "wavelength selection",
        "Bloch spectrum",
        "group velocity",
        "point spectrum",
        "phase-defect transport",
        "phase decay rates",
        "light cones",
        "asymptotic phase",
        "erf dynamics",
        "numerical properties",
    ];

    match lab() {
        Err(err) => {
            for (i, n) in names.iter().enumerate().take(11) {
                ledger.record(i + 1, n, Err(format!("standard run: {err}")));
            }
        }
        Ok(lab) => {
            ledger.record(1, names[0], criterion_1(&lab));
            ledger.record(2, names[1], criterion_2(&lab));
            ledger.record(3, names[2], criterion_3(&lab));
            ledger.record(4, names[3], criterion_4(&lab));
            let c_g = match criterion_5(&lab) {
                Ok((ok, d, c_g)) => {
                    ledger.record(5, names[4], Ok((ok, d)));
                    Some(c_g)
                }
                Err(err) => {
                    ledger.record(5, names[4], Err(err));
                    None
                }
            };
            let eta0 = 0.5 * (lab.eta_lin + lab.run.front.eta_ps);
            ledger.record(6, names[5], criterion_6(&lab, eta0));
            match (c_g, comoving(&lab)) {
                (Some(c_g), Ok(cm)) => {
                    let (lin, non) = rayon::join(|| linear_criteria(&lab, &cm, c_g), || nonlinear_criteria(&lab, &cm, c_g, eta0));
                    let (c8, c11) = lin.map_or_else(|err| (Err(err.clone()), Err(err)), |(a, b)| (a, b));
                    let [c7, c9, c10] = non.map_or_else(|err| [Err(err.clone()), Err(err.clone()), Err(err)], |r| r);
                    for (id, outcome) in [(7, c7), (8, c8), (9, c9), (10, c10), (11, c11)] {
                        ledger.record(id, names[id - 1], outcome);
                    }
                }
                (c_g, cm) => {
                    let why = match (c_g, cm) {
                        (None, _) => "group velocity unavailable".to_string(),
                        (_, Err(err)) => format!("comoving base: {err}"),
                        _ => unreachable!(),
                    };
                    for i in 6..11 {
                        ledger.record(i + 1, names[i], Err(why.clone()));
                    }
                }
            }
        }
    }
    ledger.record(12, names[11], criterion_12());

    let failed: Vec<usize> = ledger.lines.iter().filter(|l| !l.2).map(|l| l.0).collect();
    println!(
        "acceptance: {} of {} criteria passed{}",
        ledger.lines.len() - failed.len(),
        ledger.lines.len(),
        if failed.is_empty() { String::new() } else { format!("; failed: {failed:?}") }
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
