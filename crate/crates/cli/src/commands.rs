//! Subcommand drivers. Each writes into its own output directory.

use std::path::{Path, PathBuf};
use std::time::Instant;

use invasionlab_core::diagnostics::{
    decay_fit, defect_speed, lightcone_norms, measure_phase_shift, measure_wavenumber, phase_gradient_norms,
    phase_trajectory, ConeOptions, DecayFit, DecayKind,
};
use invasionlab_core::eikonal::{eikonal_run, fit_erf, EikonalConfig, ErfFit};
use invasionlab_core::front::{default_level, extract_front, front_position};
use invasionlab_core::interp::CubicSpline;
use invasionlab_core::spectral::{self, PointSpectrumOptions};
use invasionlab_core::stepper::FiredEvent;
use invasionlab_core::wavetrain::{self, LimitConvention, WavelengthQuadrature};
use invasionlab_core::{Error as CoreError, FrontProfile, Grid, Params, State, Stepper, Trajectory, WaveTrain};
use serde::{Deserialize, Serialize};

use crate::config::{parse_json, read_json, RunConfig};
use crate::error::{CliError, CliResult};
use crate::io::{self, file_entry, write_csv, write_json, RunManifest};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
/// Distance kept between the phase window and the front interface.
const WAKE_MARGIN: f64 = 20.0;

#[derive(Debug, Clone)]
pub struct Ctx {
    pub out: PathBuf,
    pub seed: Option<u64>,
}

fn mkdir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateOutput {
    pub dir: PathBuf,
    pub snapshots: usize,
    pub fired: Vec<FiredEvent>,
}

/// Runs the configured simulation and writes snapshots, the front-position
/// series, a heatmap and the manifest.
pub fn simulate(cfg_path: &Path, ctx: &Ctx) -> CliResult<SimulateOutput> {
    let raw = std::fs::read_to_string(cfg_path).map_err(|e| CliError::config(cfg_path.display().to_string(), e))?;
    let cfg: RunConfig = parse_json(&raw)?;
    cfg.validate()?;
    let base = cfg_path.parent().unwrap_or(Path::new("."));
    let init = cfg.initial_state(base, ctx.seed)?;
    let dir = &ctx.out;
    mkdir(dir)?;
    let clock = Instant::now();
    let mut stepper = Stepper::new(cfg.grid, cfg.params, &cfg.scheme)?;
    let level = default_level(&cfg.params);
    let mut names: Vec<String> = Vec::new();
    let mut kept: Vec<State> = Vec::new();
    let mut fronts: Vec<Vec<f64>> = Vec::new();
    let mut write_err: Option<CliError> = None;
    let result = stepper.run_with_sink(&init, &cfg.scheme, &cfg.events, |s| {
        let name = format!("snapshots/snap_{:05}.bin", names.len());
        if let Err(e) = io::write_snapshot(&dir.join(&name), s) {
            write_err = Some(e);
            return Err(CoreError::InvalidInput("snapshot write failed".into()));
        }
        names.push(name);
        if let Ok(p) = front_position(s, level) {
            fronts.push(vec![s.t, p, p + cfg.scheme.frame_speed * s.t]);
        }
        kept.push(s.clone());
        Ok(())
    });
    if let Some(e) = write_err {
        return Err(e);
    }
    let (_, fired) = result?;
    write_csv(&dir.join("front.csv"), &["t", "position", "lab_position"], &fronts)?;
    io::write_heatmap(&dir.join("heatmap.pgm"), &kept)?;
    std::fs::write(dir.join("config.json"), &raw).map_err(|e| CliError::io(dir.join("config.json"), e))?;
    let mut files = vec![];
    for rel in ["config.json", "front.csv", "heatmap.pgm", "heatmap.json"].into_iter().map(String::from).chain(names.clone()) {
        files.push(file_entry(dir, &rel)?);
    }
    let manifest = RunManifest {
        tool_version: TOOL_VERSION.to_string(),
        config: serde_json::from_str(&raw).expect("config parsed above"),
        params: cfg.params,
        grid: cfg.grid,
        scheme: cfg.scheme,
        events: cfg.events.clone(),
        seed: ctx.seed,
        snapshots: names.clone(),
        files,
        wall_clock_s: clock.elapsed().as_secs_f64(),
    };
    manifest.write(dir)?;
    Ok(SimulateOutput { dir: dir.clone(), snapshots: names.len(), fired })
}

fn load_run(run: &Path) -> CliResult<(RunManifest, Trajectory)> {
    let m = RunManifest::load(run)?;
    let snapshots = m.load_snapshots(run)?;
    Ok((m, Trajectory { snapshots, events: vec![] }))
}

/// Front position of the last snapshot and the wake window behind it.
fn wake_window(state: &State, params: &Params, l_hint: f64) -> CliResult<(f64, (f64, f64))> {
    let p = front_position(state, default_level(params))?;
    let lo = state.grid.x_min + l_hint;
    let hi = p - WAKE_MARGIN;
    if hi - lo < 4.0 * l_hint.max(1.0) {
        return Err(CliError::MissingData("wake too short to analyze".into()));
    }
    Ok((p, (lo.max(hi - 400.0), hi)))
}

fn wavetrain_for(traj: &Trajectory, params: &Params, fp: &FrontProfile) -> CliResult<WaveTrain> {
    let last = traj.last().ok_or_else(|| CliError::MissingData("no snapshots".into()))?;
    let (_, window) = wake_window(last, params, WAKE_MARGIN)?;
    // the frame moves at scheme speed; the wave train is stationary in the front frame
    let guess = wavetrain::wavetrain_from_state(last, window, fp.c_ps, wavetrain::DEFAULT_M)?;
    Ok(wavetrain::solve_wavetrain(params, fp.c_ps, &guess)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub target: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn within(name: &str, value: f64, target: f64, tolerance: f64) -> Self {
        Check { name: name.into(), value, target, tolerance, pass: (value - target).abs() <= tolerance }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub stage: String,
    pub error: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AnalysisSummary {
    pub run: String,
    pub c_ps: Option<f64>,
    pub eta_ps: Option<f64>,
    pub alignment_residual: Option<f64>,
    pub k_selected: Option<f64>,
    pub k_wt: Option<f64>,
    pub wavelength: Option<f64>,
    pub c_lin: Option<f64>,
    pub eta_lin: Option<f64>,
    pub c_g: Option<f64>,
    pub defect_speed: Option<f64>,
    pub psi_xi_sup_decay: Option<DecayFit>,
    pub psi_xi_l2_decay: Option<DecayFit>,
    pub psi_inf: Option<f64>,
    pub right_cone_decay: Option<DecayFit>,
    pub left_cone_decay: Option<DecayFit>,
    pub checks: Vec<Check>,
    pub failures: Vec<Failure>,
}

impl AnalysisSummary {
    fn record<T>(&mut self, stage: &str, r: CliResult<T>) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.failures.push(Failure { stage: stage.into(), error: e.to_string() });
                None
            }
        }
    }
}

/// Front, wake, wave-train, spectral and (for runs with events) phase-defect
/// analyses of a completed run. Stage failures are recorded, not fatal.
pub fn analyze(run: &Path, ctx: &Ctx) -> CliResult<AnalysisSummary> {
    let (m, traj) = load_run(run)?;
    let dir = &ctx.out;
    mkdir(dir)?;
    let p = m.params;
    let mut s = AnalysisSummary { run: run.display().to_string(), ..Default::default() };

    if let Some(sp) = s.record("dispersion", spectral::linear_spreading_speed(&p).map_err(CliError::from)) {
        s.c_lin = Some(sp.c_lin);
        s.eta_lin = Some(sp.eta_lin);
    }
    let fp = s.record("front", extract_front(&traj, &p, m.scheme.frame_speed).map_err(CliError::from));
    if let Some(fp) = &fp {
        s.c_ps = Some(fp.c_ps);
        s.eta_ps = Some(fp.eta_ps);
        s.alignment_residual = Some(fp.alignment_residual);
        s.checks.push(Check::within("c_ps", fp.c_ps, (1.0 + p.a) / 2f64.sqrt(), 0.05));
        s.checks.push(Check::within("eta_ps", fp.eta_ps, (1.0 - p.a) / 2f64.sqrt(), 0.05));
        if let Some(c_lin) = s.c_lin {
            s.checks.push(Check { name: "pushed".into(), value: fp.c_ps - c_lin, target: 0.0, tolerance: 0.0, pass: fp.c_ps > c_lin });
        }
        let (xs, us): (Vec<f64>, Vec<f64>) = fp.grid.xs().into_iter().zip(fp.u.iter().copied()).unzip();
        write_csv(
            &dir.join("front_profile.csv"),
            &["xi", "u", "w"],
            &xs.iter().zip(&us).zip(&fp.w).map(|((x, u), w)| vec![*x, *u, *w]).collect::<Vec<_>>(),
        )?;
    } else {
        s.failures.push(Failure { stage: "wavetrain".into(), error: "skipped: front unavailable".into() });
        s.failures.push(Failure { stage: "spectrum".into(), error: "skipped: front unavailable".into() });
    }

    let last = traj.last().expect("manifest has snapshots");
    if let Some((_, window)) = s.record("wake", wake_window(last, &p, WAKE_MARGIN)) {
        if let Some(k) = s.record("wavenumber", measure_wavenumber(last, window).map_err(CliError::from)) {
            s.k_selected = Some(k.k);
        }
    }
    let wt = fp.as_ref().and_then(|fp| s.record("wavetrain", wavetrain_for(&traj, &p, fp)));
    if let Some(wt) = &wt {
        s.k_wt = Some(wt.k_wt);
        s.wavelength = Some(wt.l);
        if let Some(k) = s.k_selected {
            s.checks.push(Check::within("k_selected/k_wt", k / wt.k_wt, 1.0, 0.02));
        }
        if let Some(g) = s.record("spectrum", spectral::group_velocity_adjoint(&p, wt).map_err(CliError::from)) {
            s.c_g = Some(g.c_g);
        }
    }

    let first_event = m.events.first().map(|e| e.t_fire);
    if let (Some(t_ev), Some(fp), Some(wt), Some(c_g)) = (first_event, &fp, &wt, s.c_g) {
        let r = defect_analysis(&traj, &p, fp, wt, c_g, t_ev, s.eta_lin, dir);
        if let Some(d) = s.record("phase", r) {
            s.defect_speed = d.speed;
            s.psi_xi_sup_decay = d.sup;
            s.psi_xi_l2_decay = d.l2;
            s.psi_inf = d.psi_inf;
            s.right_cone_decay = d.right;
            s.left_cone_decay = d.left;
            s.failures.extend(d.failures);
            if let Some(v) = d.speed {
                s.checks.push(Check::within("defect_speed/c_g", v / c_g, 1.0, 0.1));
            }
        }
    }
    write_json(&dir.join("summary.json"), &s)?;
    Ok(s)
}

struct DefectOutcome {
    speed: Option<f64>,
    sup: Option<DecayFit>,
    l2: Option<DecayFit>,
    psi_inf: Option<f64>,
    right: Option<DecayFit>,
    left: Option<DecayFit>,
    failures: Vec<Failure>,
}

/// Phase defect after the first event, with all states expressed in the
/// front frame `ξ = x − p(t)`.
#[allow(clippy::too_many_arguments)]
fn defect_analysis(
    traj: &Trajectory,
    p: &Params,
    fp: &FrontProfile,
    wt: &WaveTrain,
    c_g: f64,
    t_ev: f64,
    eta_lin: Option<f64>,
    dir: &Path,
) -> CliResult<DefectOutcome> {
    let level = default_level(p);
    let mut framed = Vec::new();
    for s in &traj.snapshots {
        let pos = front_position(s, level)?;
        framed.push(State { grid: s.grid.shifted(-pos), ..s.clone() });
    }
    let baseline = framed.iter().filter(|s| s.t < t_ev).last().cloned();
    let after: Vec<State> = framed.into_iter().filter(|s| s.t >= t_ev).collect();
    if after.len() < 10 {
        return Err(CliError::MissingData("fewer than 10 snapshots after the event".into()));
    }
    let lo = after.iter().chain(baseline.iter()).map(|s| s.grid.x_min).fold(f64::MIN, f64::max) + wt.l;
    let hi = -WAKE_MARGIN;
    let window = (lo, hi);
    let xi_out: Vec<f64> = {
        let (a, b) = (lo + wt.l, hi - wt.l);
        if b <= a {
            return Err(CliError::MissingData("wake too short for a phase window".into()));
        }
        let n = ((b - a) / 0.5).floor() as usize + 1;
        (0..n).map(|i| a + 0.5 * i as f64).collect()
    };
    let pt = phase_trajectory(&after, baseline.as_ref(), wt, window, 10, &xi_out)?;
    let mut out = DefectOutcome { speed: None, sup: None, l2: None, psi_inf: None, right: None, left: None, failures: vec![] };
    match defect_speed(&pt) {
        Ok(d) => out.speed = Some(d.speed),
        Err(e) => out.failures.push(out_fail("defect_speed", &e)),
    }
    let norms = phase_gradient_norms(&pt);
    let ts: Vec<f64> = pt.t.iter().map(|t| t - t_ev).collect();
    let sup: Vec<f64> = norms.iter().map(|n| n.0).collect();
    let l2: Vec<f64> = norms.iter().map(|n| n.1).collect();
    match decay_fit(&ts, &sup, DecayKind::Algebraic) {
        Ok(f) => out.sup = Some(f),
        Err(e) => out.failures.push(out_fail("psi_xi_sup_decay", &e)),
    }
    match decay_fit(&ts, &l2, DecayKind::Algebraic) {
        Ok(f) => out.l2 = Some(f),
        Err(e) => out.failures.push(out_fail("psi_xi_l2_decay", &e)),
    }
    write_csv(
        &dir.join("norms.csv"),
        &["t", "psi_xi_sup", "psi_xi_l2"],
        &ts.iter().zip(&norms).map(|(t, n)| vec![*t, n.0, n.1]).collect::<Vec<_>>(),
    )?;

    if let (Some(base), Some(eta_lin)) = (&baseline, eta_lin) {
        let eta0 = 0.5 * (eta_lin + fp.eta_ps);
        let xi_max = base.grid.x(base.u.iter().rposition(|v| v.abs() >= 1e-6).unwrap_or(0));
        // the front position is re-measured per snapshot, so grids differ by
        // sub-cell shifts; resample on the baseline grid, padding with the
        // baseline outside the shifted domain
        let on_base = |s: &State| -> CliResult<State> {
            let su = CubicSpline::uniform(s.grid.x_min, s.grid.h(), &s.u)?;
            let sw = CubicSpline::uniform(s.grid.x_min, s.grid.h(), &s.w)?;
            let (lo, hi) = su.domain();
            let xs = base.grid.xs();
            let pick = |sp: &CubicSpline, x: f64, b: f64| if x < lo || x > hi { b } else { sp.eval(x) };
            Ok(State {
                grid: base.grid,
                t: s.t,
                u: xs.iter().zip(&base.u).map(|(&x, &b)| pick(&su, x, b)).collect(),
                w: xs.iter().zip(&base.w).map(|(&x, &b)| pick(&sw, x, b)).collect(),
            })
        };
        let resampled: Vec<State> = after.iter().map(on_base).collect::<CliResult<_>>()?;
        let fin_b = resampled.last().expect("checked above");
        match measure_phase_shift(fin_b, base, eta0, 50.0, xi_max, 10.0) {
            Ok((psi_inf, _)) => {
                out.psi_inf = Some(psi_inf);
                let opts = ConeOptions { c_g, delta_c: 0.25 * c_g.abs(), eta0, t0: t_ev, xi_max };
                match lightcone_norms(&resampled, std::slice::from_ref(base), psi_inf, &opts) {
                    Ok(c) => {
                        match decay_fit(&c.t, &c.right, DecayKind::Exponential) {
                            Ok(f) => out.right = Some(f),
                            Err(e) => out.failures.push(out_fail("right_cone", &e)),
                        }
                        match decay_fit(&c.t, &c.left, DecayKind::Algebraic) {
                            Ok(f) => out.left = Some(f),
                            Err(e) => out.failures.push(out_fail("left_cone", &e)),
                        }
                        write_csv(
                            &dir.join("cones.csv"),
                            &["t", "right", "left"],
                            &(0..c.t.len()).map(|i| vec![c.t[i], c.right[i], c.left[i]]).collect::<Vec<_>>(),
                        )?;
                    }
                    Err(e) => out.failures.push(out_fail("cones", &e)),
                }
            }
            Err(e) => out.failures.push(out_fail("psi_inf", &e)),
        }
    }
    Ok(out)
}

fn out_fail(stage: &str, e: &dyn std::fmt::Display) -> Failure {
    Failure { stage: stage.into(), error: e.to_string() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveTrainRecord {
    pub params: Params,
    pub wavetrain: WaveTrain,
    pub eps_l: f64,
    pub quadrature: WavelengthQuadrature,
    pub quadrature_critical_points: Option<WavelengthQuadrature>,
    /// `3ε^{1/3}`.
    pub bound: f64,
    pub within_bound: bool,
}

/// Converged wave train of a run's wake plus the wavelength quadrature.
pub fn wavetrain_cmd(run: &Path, ctx: &Ctx) -> CliResult<WaveTrainRecord> {
    let (m, traj) = load_run(run)?;
    let p = m.params;
    let fp = extract_front(&traj, &p, m.scheme.frame_speed)?;
    let wt = wavetrain_for(&traj, &p, &fp)?;
    let quadrature = wavetrain::wavelength_quadrature(&p)?;
    let alt = wavetrain::wavelength_quadrature_with(&p, LimitConvention::CriticalPoints, 1e-10).ok();
    let eps_l = p.eps * wt.l;
    let bound = 3.0 * p.eps.cbrt();
    let rec = WaveTrainRecord {
        params: p,
        eps_l,
        within_bound: (eps_l - quadrature.sum()).abs() <= bound,
        quadrature,
        quadrature_critical_points: alt,
        bound,
        wavetrain: wt,
    };
    mkdir(&ctx.out)?;
    write_json(&ctx.out.join("wavetrain.json"), &rec)?;
    let h = rec.wavetrain.h();
    let rows: Vec<Vec<f64>> =
        (0..rec.wavetrain.m).map(|j| vec![j as f64 * h, rec.wavetrain.u[j], rec.wavetrain.w[j]]).collect();
    write_csv(&ctx.out.join("wavetrain.csv"), &["xi", "u", "w"], &rows)?;
    Ok(rec)
}

/// Averaged comoving front profile with `c_ps`, `η_ps`.
pub fn front_cmd(run: &Path, ctx: &Ctx) -> CliResult<FrontProfile> {
    let (m, traj) = load_run(run)?;
    let fp = extract_front(&traj, &m.params, m.scheme.frame_speed)?;
    mkdir(&ctx.out)?;
    write_json(&ctx.out.join("front.json"), &fp)?;
    let rows: Vec<Vec<f64>> = (0..fp.grid.n).map(|i| vec![fp.grid.x(i), fp.u[i], fp.w[i]]).collect();
    write_csv(&ctx.out.join("front_profile.csv"), &["xi", "u", "w"], &rows)?;
    Ok(fp)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub params: Params,
}

/// Accepts either a full run config or `{"params": {...}}`.
fn load_params(path: &Path) -> CliResult<Params> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::config(path.display().to_string(), e))?;
    let v: serde_json::Value = parse_json(&text)?;
    let p = if v.get("grid").is_some() {
        let c: RunConfig = parse_json(&text)?;
        c.params
    } else {
        parse_json::<ParamsConfig>(&text)?.params
    };
    p.validate().map_err(|e| CliError::config("params", e))?;
    Ok(p)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersionRecord {
    pub params: Params,
    pub c_lin: f64,
    pub eta_lin: f64,
    pub lambda: [f64; 2],
    pub nu: [f64; 2],
    /// `2√(a(1−a))` and `√(a(1−a))`, the `ε = 0` values.
    pub c_lin_scalar: f64,
    pub eta_lin_scalar: f64,
}

pub fn dispersion_cmd(cfg_path: &Path, ctx: &Ctx) -> CliResult<DispersionRecord> {
    let p = load_params(cfg_path)?;
    let sp = spectral::linear_spreading_speed(&p)?;
    let rec = DispersionRecord {
        params: p,
        c_lin: sp.c_lin,
        eta_lin: sp.eta_lin,
        lambda: [sp.root.lambda.re, sp.root.lambda.im],
        nu: [sp.root.nu.re, sp.root.nu.im],
        c_lin_scalar: 2.0 * p.alpha().sqrt(),
        eta_lin_scalar: p.alpha().sqrt(),
    };
    mkdir(&ctx.out)?;
    write_json(&ctx.out.join("dispersion.json"), &rec)?;
    Ok(rec)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRecord {
    pub c_g: f64,
    pub c_g_adjoint: f64,
    #[serde(rename = "D_eff")]
    pub d_eff: f64,
    pub theta: f64,
    pub zero_eigenvalue: [f64; 2],
    pub gap: f64,
    pub max_re_nonzero_k: f64,
    pub violations: Vec<String>,
    pub point: Option<PointRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub eta: f64,
    pub eta0: f64,
    pub eigenvalue_nearest_zero: [f64; 2],
    pub next_eigenvalue: [f64; 2],
    pub angle: f64,
    pub ptr_normalization_check: f64,
}

/// Bloch sweep and group velocity of a stored wave train; with a stored
/// front profile also the weighted point spectrum.
pub fn spectrum_cmd(wt_path: &Path, n_k: usize, front: Option<&Path>, ctx: &Ctx) -> CliResult<SpectrumRecord> {
    let rec: WaveTrainRecord =
        read_json(wt_path).map_err(|e| CliError::MissingData(format!("{}: {e}", wt_path.display())))?;
    let (p, wt) = (rec.params, rec.wavetrain);
    let bs = spectral::bloch_sweep(&p, &wt, n_k)?;
    let cc = spectral::critical_curve(&p, &wt, &[1e-3, 2e-3, 4e-3, 8e-3])?;
    let ga = spectral::group_velocity_adjoint(&p, &wt)?;
    mkdir(&ctx.out)?;
    let mut rows = Vec::new();
    for (k, ev) in bs.k_grid.iter().zip(&bs.eigenvalues) {
        for (j, l) in ev.iter().take(4).enumerate() {
            rows.push(vec![*k, j as f64, l.re, l.im]);
        }
    }
    write_csv(&ctx.out.join("bloch.csv"), &["k", "rank", "re", "im"], &rows)?;
    let point = match front {
        Some(fpath) => {
            let fp: FrontProfile =
                read_json(fpath).map_err(|e| CliError::MissingData(format!("{}: {e}", fpath.display())))?;
            let sp = spectral::linear_spreading_speed(&p)?;
            let eta0 = 0.5 * (sp.eta_lin + fp.eta_ps);
            let r = spectral::front_point_spectrum(&fp, &p, 0.1, eta0, &PointSpectrumOptions::default())?;
            Some(PointRecord {
                eta: r.eta,
                eta0,
                eigenvalue_nearest_zero: [r.eigenvalue_nearest_zero.re, r.eigenvalue_nearest_zero.im],
                next_eigenvalue: [r.next_eigenvalue.re, r.next_eigenvalue.im],
                angle: r.angle,
                ptr_normalization_check: r.ptr_normalization_check,
            })
        }
        None => None,
    };
    let out = SpectrumRecord {
        c_g: cc.c_g,
        c_g_adjoint: ga.c_g,
        d_eff: cc.d_eff,
        theta: bs.theta_fit,
        zero_eigenvalue: [bs.zero_eigenvalue.re, bs.zero_eigenvalue.im],
        gap: bs.gap,
        max_re_nonzero_k: bs.max_re_nonzero_k,
        violations: bs.violations,
        point,
    };
    write_json(&ctx.out.join("spectrum.json"), &out)?;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EikonalRunConfig {
    pub eikonal: EikonalConfig,
    pub init: EikonalInit,
    pub t_end: f64,
    pub record_every: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum EikonalInit {
    /// `amplitude·(1 + tanh((ξ − center)/width))/2`.
    Step { amplitude: f64, center: f64, width: f64 },
    /// `amplitude·exp(−((ξ − center)/width)²)`.
    Bump { amplitude: f64, center: f64, width: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EikonalRecord {
    pub t_end: f64,
    pub erf_fit: Option<ErfFit>,
    pub fit_error: Option<String>,
}

pub fn eikonal_cmd(cfg_path: &Path, ctx: &Ctx) -> CliResult<EikonalRecord> {
    let cfg: EikonalRunConfig = read_json(cfg_path)?;
    if !(cfg.eikonal.dt > 0.0) {
        return Err(CliError::config("eikonal.dt", "must be positive"));
    }
    if cfg.record_every == 0 {
        return Err(CliError::config("record_every", "must be >= 1"));
    }
    cfg.eikonal.validate().map_err(|e| CliError::config("eikonal", e))?;
    let g: Grid = cfg.eikonal.grid;
    let psi0: Vec<f64> = g
        .xs()
        .iter()
        .map(|&x| match cfg.init {
            EikonalInit::Step { amplitude, center, width } => 0.5 * amplitude * (1.0 + ((x - center) / width).tanh()),
            EikonalInit::Bump { amplitude, center, width } => amplitude * (-((x - center) / width).powi(2)).exp(),
        })
        .collect();
    let tr = eikonal_run(&psi0, &cfg.eikonal, cfg.t_end, cfg.record_every)?;
    mkdir(&ctx.out)?;
    let xs = g.xs();
    let mut rows = Vec::new();
    for (t, psi) in tr.t.iter().zip(&tr.psi) {
        for (x, v) in xs.iter().zip(psi) {
            rows.push(vec![*t, *x, *v]);
        }
    }
    write_csv(&ctx.out.join("eikonal.csv"), &["t", "xi", "psi"], &rows)?;
    let t = *tr.t.last().expect("initial record");
    let (erf_fit, fit_error) = match fit_erf(&xs, tr.psi.last().unwrap(), t.max(1e-12), cfg.eikonal.c_g, true) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let rec = EikonalRecord { t_end: t, erf_fit, fit_error };
    write_json(&ctx.out.join("eikonal.json"), &rec)?;
    Ok(rec)
}

/// Validates a run, re-renders its heatmap and writes a markdown report that
/// includes an analysis summary when one is given.
pub fn report_cmd(run: &Path, analysis: Option<&Path>, ctx: &Ctx) -> CliResult<PathBuf> {
    let (m, traj) = load_run(run)?;
    mkdir(&ctx.out)?;
    let meta = io::write_heatmap(&ctx.out.join("heatmap.pgm"), &traj.snapshots)?;
    let mut md = String::new();
    md.push_str(&format!("# Run report: {}\n\n", run.display()));
    md.push_str(&format!(
        "- params: a = {}, gamma = {}, eps = {}\n- grid: [{}, {}], n = {}\n- scheme: dt = {}, frame_speed = {}, t_end = {}\n",
        m.params.a, m.params.gamma, m.params.eps, m.grid.x_min, m.grid.x_max, m.grid.n, m.scheme.dt,
        m.scheme.frame_speed, m.scheme.t_end
    ));
    md.push_str(&format!(
        "- snapshots: {} (heatmap {}x{}, u in [{:.6}, {:.6}])\n- events: {}\n- files verified: {}\n",
        m.snapshots.len(),
        meta.cols,
        meta.rows,
        meta.min,
        meta.max,
        m.events.len(),
        m.files.len()
    ));
    if let Ok((_, rows)) = io::read_csv(&run.join("front.csv")) {
        if rows.len() >= 2 {
            let (a, b) = (&rows[0], &rows[rows.len() - 1]);
            md.push_str(&format!("- mean front speed (lab): {:.6}\n", (b[2] - a[2]) / (b[0] - a[0])));
        }
    }
    if let Some(a) = analysis {
        let s: AnalysisSummary = read_json(&a.join("summary.json"))
            .map_err(|e| CliError::MissingData(format!("{}: {e}", a.display())))?;
        md.push_str("\n| check | value | target | tolerance | result |\n|---|---|---|---|---|\n");
        for c in &s.checks {
            md.push_str(&format!(
                "| {} | {:.6} | {:.6} | {} | {} |\n",
                c.name,
                c.value,
                c.target,
                c.tolerance,
                if c.pass { "PASS" } else { "FAIL" }
            ));
        }
        for f in &s.failures {
            md.push_str(&format!("\n- {}: {}", f.stage, f.error));
        }
        md.push('\n');
    }
    let path = ctx.out.join("report.md");
    std::fs::write(&path, md).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}
