//! IMEX time stepping in the lab or comoving frame.
//!
//! Diffusion and advection are Crank–Nicolson, the kinetics are explicit Heun.
//! In a moving frame `w` is advected implicitly with a small fourth-order
//! dissipation `−1e−3·h³ ∂⁴` since it has no diffusion of its own.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::front::FrontProfile;
use crate::grid::{Grid, State};
use crate::linalg::banded::{BandMatrix, CyclicBand, CyclicLu};
use crate::model::Params;
use crate::weight::Weight;

pub const W_DISSIPATION: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bc {
    Neumann,
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeConfig {
    pub dt: f64,
    /// 0 for the lab frame.
    pub frame_speed: f64,
    pub bc: Bc,
    pub record_every: usize,
    pub t_end: f64,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        SchemeConfig { dt: 0.02, frame_speed: 0.0, bc: Bc::Neumann, record_every: 500, t_end: 100.0 }
    }
}

impl SchemeConfig {
    pub fn validate(&self, params: &Params) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidInput(format!("dt = {} must be positive", self.dt)));
        }
        let bound = params.stability_bound(-0.5, 1.1);
        if self.dt > bound {
            return Err(Error::InvalidInput(format!("dt = {} exceeds stability bound {bound:.4}", self.dt)));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidInput("record_every must be >= 1".into()));
        }
        if !(self.t_end >= 0.0) || !self.frame_speed.is_finite() {
            return Err(Error::InvalidInput("t_end must be >= 0 and frame_speed finite".into()));
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Component {
    U,
    W,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationEvent {
    pub t_fire: f64,
    pub center: f64,
    pub width: f64,
    pub amplitude: f64,
    pub component: Component,
}

impl PerturbationEvent {
    pub fn apply(&self, state: &mut State) {
        let target = match self.component {
            Component::U => &mut state.u,
            Component::W => &mut state.w,
        };
        for (i, v) in target.iter_mut().enumerate() {
            let z = (state.grid.x(i) - self.center) / self.width;
            *v += self.amplitude * (-z * z).exp();
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiredEvent {
    pub step: usize,
    pub t: f64,
    pub event: PerturbationEvent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub snapshots: Vec<State>,
    pub events: Vec<FiredEvent>,
}

impl Trajectory {
    pub fn last(&self) -> Option<&State> {
        self.snapshots.last()
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }
}

/// Assembles `diff·∂² + adv(ξ)·∂ + zero(ξ) − diss·∂⁴` with second-order
/// centered stencils. Neumann ends use mirror ghosts, periodic ends wrap.
fn assemble(grid: &Grid, bc: Bc, diff: f64, adv: &[f64], zero: &[f64], diss: f64) -> CyclicBand {
    let n = grid.n;
    let h = grid.h();
    let p = if diss != 0.0 { 2 } else { 1 };
    let mut band = BandMatrix::zeros(n, p, p);
    let mut corners: Vec<(usize, usize, f64)> = Vec::new();
    for i in 0..n {
        let a = adv[i] / (2.0 * h);
        let d2 = diff / (h * h);
        let d4 = diss / (h * h * h * h);
        let mut stencil = [0.0; 5];
        stencil[1] += d2 - a;
        stencil[2] += -2.0 * d2 + zero[i];
        stencil[3] += d2 + a;
        if diss != 0.0 {
            stencil[0] -= d4;
            stencil[1] += 4.0 * d4;
            stencil[2] -= 6.0 * d4;
            stencil[3] += 4.0 * d4;
            stencil[4] -= d4;
        }
        for (k, &s) in stencil.iter().enumerate() {
            if s == 0.0 {
                continue;
            }
            let j = i as isize + k as isize - 2;
            let last = n as isize - 1;
            match bc {
                Bc::Neumann => {
                    let jj = if j < 0 { -j } else if j > last { 2 * last - j } else { j };
                    band.add(i, jj as usize, s);
                }
                Bc::Periodic => {
                    if (0..=last).contains(&j) {
                        band.add(i, j as usize, s);
                    } else {
                        let jj = j.rem_euclid(n as isize) as usize;
                        match corners.iter_mut().find(|c| c.0 == i && c.1 == jj) {
                            Some(c) => c.2 += s,
                            None => corners.push((i, jj, s)),
                        }
                    }
                }
            }
        }
    }
    CyclicBand { band, corners }
}

/// `I + θ·A` for a cyclic band operator.
fn shifted(a: &CyclicBand, theta: f64) -> CyclicBand {
    let mut band = a.band.clone();
    band.scale_shift(theta, 1.0);
    let corners = a.corners.iter().map(|&(i, j, v)| (i, j, theta * v)).collect();
    CyclicBand { band, corners }
}

/// Spatially varying linear coefficients of the implicit part.
#[derive(Debug, Clone)]
pub struct LinearCoefficients {
    pub adv_u: Vec<f64>,
    pub zero_u: Vec<f64>,
    pub adv_w: Vec<f64>,
    pub zero_w: Vec<f64>,
}

impl LinearCoefficients {
    /// Plain comoving frame with speed `c`.
    pub fn frame(n: usize, c: f64) -> Self {
        LinearCoefficients { adv_u: vec![c; n], zero_u: vec![0.0; n], adv_w: vec![c; n], zero_w: vec![0.0; n] }
    }

    /// Comoving frame conjugated by a weight: `ω·A(·/ω)` with `∂ → ∂ − φ'`.
    pub fn conjugated(grid: &Grid, c: f64, weight: &Weight) -> Self {
        let n = grid.n;
        let mut s = Self::frame(n, c);
        for i in 0..n {
            let (_, p1, p2) = weight.log_derivs(grid.x(i));
            s.adv_u[i] = c - 2.0 * p1;
            s.zero_u[i] = p1 * p1 - p2 - c * p1;
            s.zero_w[i] = -c * p1;
        }
        s
    }
}

#[derive(Debug, Clone)]
enum Kinetics {
    Nonlinear,
    /// `F'(u_ps(ξ))·v` with the `f'` column frozen.
    Frozen { df: Vec<f64> },
}

struct Implicit {
    lhs: CyclicLu,
    rhs: CyclicBand,
}

impl Implicit {
    fn new(op: &CyclicBand, dt: f64) -> Result<Self> {
        Ok(Implicit { lhs: shifted(op, -0.5 * dt).factor()?, rhs: shifted(op, 0.5 * dt) })
    }
}

/// Reusable time stepper; factorizations are built once.
pub struct Stepper {
    grid: Grid,
    params: Params,
    dt: f64,
    kin: Kinetics,
    imp_u: Implicit,
    imp_w: Option<Implicit>,
    buf: [Vec<f64>; 8],
}

impl Stepper {
    pub fn new(grid: Grid, params: Params, cfg: &SchemeConfig) -> Result<Self> {
        let coeffs = LinearCoefficients::frame(grid.n, cfg.frame_speed);
        Self::with_coefficients(grid, params, cfg, &coeffs, None)
    }

    /// Stepper for `v_t = A v + F'(u_ps) v`, optionally conjugated by `weight`.
    pub fn linearized(
        grid: Grid,
        params: Params,
        cfg: &SchemeConfig,
        frozen_u: &[f64],
        weight: Option<&Weight>,
    ) -> Result<Self> {
        if frozen_u.len() != grid.n {
            return Err(Error::GridMismatch { expected: grid.n, got: frozen_u.len() });
        }
        let coeffs = match weight {
            Some(w) => LinearCoefficients::conjugated(&grid, cfg.frame_speed, w),
            None => LinearCoefficients::frame(grid.n, cfg.frame_speed),
        };
        let df = frozen_u.iter().map(|&u| params.df(u)).collect();
        Self::with_coefficients(grid, params, cfg, &coeffs, Some(df))
    }

    fn with_coefficients(
        grid: Grid,
        params: Params,
        cfg: &SchemeConfig,
        co: &LinearCoefficients,
        frozen: Option<Vec<f64>>,
    ) -> Result<Self> {
        grid.validate()?;
        cfg.validate(&params)?;
        let n = grid.n;
        let op_u = assemble(&grid, cfg.bc, 1.0, &co.adv_u, &co.zero_u, 0.0);
        let moving = cfg.frame_speed != 0.0 || co.adv_w.iter().any(|&v| v != 0.0);
        let imp_w = if moving || co.zero_w.iter().any(|&v| v != 0.0) {
            let h = grid.h();
            let diss = if moving { W_DISSIPATION * h * h * h } else { 0.0 };
            let op_w = assemble(&grid, cfg.bc, 0.0, &co.adv_w, &co.zero_w, diss);
            Some(Implicit::new(&op_w, cfg.dt)?)
        } else {
            None
        };
        let kin = match frozen {
            Some(df) => Kinetics::Frozen { df },
            None => Kinetics::Nonlinear,
        };
        Ok(Stepper {
            grid,
            params,
            dt: cfg.dt,
            kin,
            imp_u: Implicit::new(&op_u, cfg.dt)?,
            imp_w,
            buf: std::array::from_fn(|_| vec![0.0; n]),
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    fn kinetics(&self, u: &[f64], w: &[f64], fu: &mut [f64], fw: &mut [f64]) {
        let p = &self.params;
        match &self.kin {
            Kinetics::Nonlinear => {
                for i in 0..u.len() {
                    fu[i] = p.f(u[i]) - w[i];
                    fw[i] = p.eps * (u[i] - p.gamma * w[i]);
                }
            }
            Kinetics::Frozen { df } => {
                for i in 0..u.len() {
                    fu[i] = df[i] * u[i] - w[i];
                    fw[i] = p.eps * (u[i] - p.gamma * w[i]);
                }
            }
        }
    }

    /// Advances `(u, w)` by one step in place.
    pub fn advance(&mut self, u: &mut [f64], w: &mut [f64]) {
        let dt = self.dt;
        let mut b = std::mem::take(&mut self.buf);
        {
            let [fu, fw, bu, bw, us, ws, fu2, fw2] = &mut b;
            self.kinetics(u, w, fu, fw);
            self.imp_u.rhs.matvec(u, bu);
            match &self.imp_w {
                Some(imp) => imp.rhs.matvec(w, bw),
                None => bw.copy_from_slice(w),
            }
            for i in 0..u.len() {
                us[i] = bu[i] + dt * fu[i];
                ws[i] = bw[i] + dt * fw[i];
            }
            self.imp_u.lhs.solve_in_place(us);
            if let Some(imp) = &self.imp_w {
                imp.lhs.solve_in_place(ws);
            }
            self.kinetics(us, ws, fu2, fw2);
            for i in 0..u.len() {
                u[i] = bu[i] + 0.5 * dt * (fu[i] + fu2[i]);
                w[i] = bw[i] + 0.5 * dt * (fw[i] + fw2[i]);
            }
            self.imp_u.lhs.solve_in_place(u);
            if let Some(imp) = &self.imp_w {
                imp.lhs.solve_in_place(w);
            }
        }
        self.buf = b;
    }

    /// Integrates to `cfg.t_end`, firing events and handing every recorded
    /// snapshot (including the initial one) to `sink`.
    pub fn run_with_sink(
        &mut self,
        initial: &State,
        cfg: &SchemeConfig,
        events: &[PerturbationEvent],
        mut sink: impl FnMut(&State) -> Result<()>,
    ) -> Result<(State, Vec<FiredEvent>)> {
        initial.check()?;
        if initial.grid != self.grid {
            return Err(Error::InvalidInput("initial state grid differs from stepper grid".into()));
        }
        if events.windows(2).any(|e| e[1].t_fire < e[0].t_fire) {
            return Err(Error::InvalidInput("events must be sorted by t_fire".into()));
        }
        let mut st = initial.clone();
        let t0 = st.t;
        let mut fired = Vec::new();
        let mut next_event = 0;
        sink(&st)?;
        let n_steps = cfg.n_steps();
        for step in 0..n_steps {
            while next_event < events.len() && st.t >= events[next_event].t_fire - 1e-9 * self.dt {
                let ev = events[next_event];
                ev.apply(&mut st);
                fired.push(FiredEvent { step, t: st.t, event: ev });
                next_event += 1;
            }
            let (u, w) = (&mut st.u, &mut st.w);
            self.advance(u, w);
            st.t = t0 + (step + 1) as f64 * self.dt;
            if !st.is_finite() {
                return Err(Error::Blowup { step: step + 1, t: st.t });
            }
            if (step + 1) % cfg.record_every == 0 {
                sink(&st)?;
            }
        }
        Ok((st, fired))
    }

    pub fn run(&mut self, initial: &State, cfg: &SchemeConfig, events: &[PerturbationEvent]) -> Result<Trajectory> {
        let mut snapshots = Vec::new();
        let (_, fired) = self.run_with_sink(initial, cfg, events, |s| {
            snapshots.push(s.clone());
            Ok(())
        })?;
        Ok(Trajectory { snapshots, events: fired })
    }
}

/// One step of the full system.
pub fn step(state: &State, params: &Params, cfg: &SchemeConfig) -> Result<State> {
    let mut s = Stepper::new(state.grid, *params, cfg)?;
    let mut out = state.clone();
    s.advance(&mut out.u, &mut out.w);
    out.t += cfg.dt;
    if !out.is_finite() {
        return Err(Error::Blowup { step: 1, t: out.t });
    }
    Ok(out)
}

pub fn run(initial: &State, params: &Params, cfg: &SchemeConfig, events: &[PerturbationEvent]) -> Result<Trajectory> {
    Stepper::new(initial.grid, *params, cfg)?.run(initial, cfg, events)
}

/// One step of the linearization about a frozen front profile.
pub fn linearized_step(
    state: &State,
    frozen: &FrontProfile,
    params: &Params,
    cfg: &SchemeConfig,
    weight: Option<&Weight>,
) -> Result<State> {
    if frozen.grid != state.grid {
        return Err(Error::InvalidInput("frozen profile must be sampled on the state grid".into()));
    }
    let mut s = Stepper::linearized(state.grid, *params, cfg, &frozen.u, weight)?;
    let mut out = state.clone();
    s.advance(&mut out.u, &mut out.w);
    out.t += cfg.dt;
    if !out.is_finite() {
        return Err(Error::Blowup { step: 1, t: out.t });
    }
    Ok(out)
}
