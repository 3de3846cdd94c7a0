//! Scripted experiments: the standard invasion run, comoving restarts with
//! localized perturbations, linearized runs and parameter continuation of
//! wave trains.

use std::time::Instant;

use invasionlab_core::front::{default_level, extract_front, front_position};
use invasionlab_core::wavetrain::solve_wavetrain;
use invasionlab_core::{Bc, FrontProfile, Grid, Params, Result, SchemeConfig, State, Stepper, Trajectory, WaveTrain};

pub const DT: f64 = 0.02;
pub const RECORD_EVERY: usize = 500;

/// Invasion into the rest state from a bump near the left end of
/// `[−half, half]`, integrated in the lab frame with `h = 0.1`.
pub fn invasion_run(params: &Params, half: f64, t_end: f64) -> Result<Trajectory> {
    let grid = Grid::with_spacing(-half, half, 0.1)?;
    let center = -half + 20.0;
    let init = State::from_fn(grid, |x| (0.5 * (-((x - center) / 5.0).powi(2)).exp(), 0.0));
    let cfg = SchemeConfig { dt: DT, frame_speed: 0.0, bc: Bc::Neumann, record_every: RECORD_EVERY, t_end };
    Stepper::new(grid, *params, &cfg)?.run(&init, &cfg, &[])
}

pub struct StandardRun {
    pub params: Params,
    pub traj: Trajectory,
    pub front: FrontProfile,
    /// Wall-clock seconds for the simulation and front extraction.
    pub seconds: f64,
}

/// `[−400, 400]`, `t = 900`: the front has crossed most of the domain and
/// left a wake of about ten wavelengths.
pub fn standard_run(params: &Params) -> Result<StandardRun> {
    let clock = Instant::now();
    let traj = invasion_run(params, 400.0, 900.0)?;
    let front = extract_front(&traj, params, 0.0)?;
    Ok(StandardRun { params: *params, traj, front, seconds: clock.elapsed().as_secs_f64() })
}

/// Lab-frame front speed on a shorter domain.
pub fn front_speed(params: &Params) -> Result<f64> {
    let traj = invasion_run(params, 200.0, 400.0)?;
    Ok(extract_front(&traj, params, 0.0)?.c_ps)
}

/// `state` restricted to `[lo, hi]` in coordinates centered at its front,
/// shifted by a whole number of cells so no interpolation is involved.
pub fn comoving_base(state: &State, params: &Params, lo: f64, hi: f64) -> Result<State> {
    let g = state.grid;
    let h = g.h();
    let p = front_position(state, default_level(params))?;
    let k0 = ((p - g.x_min) / h).round() as usize;
    let shift = g.x(k0);
    let i0 = (0..g.n).find(|&i| g.x(i) - shift >= lo - 1e-9).unwrap_or(0);
    let i1 = (0..g.n).rev().find(|&i| g.x(i) - shift <= hi + 1e-9).unwrap_or(g.n - 1);
    let grid = Grid { x_min: (i0 as f64 - k0 as f64) * h, x_max: (i1 as f64 - k0 as f64) * h, n: i1 - i0 + 1 };
    State::new(grid, 0.0, state.u[i0..=i1].to_vec(), state.w[i0..=i1].to_vec())
}

/// `exp(−((ξ − center)/width)²)` on `grid`.
pub fn gaussian(grid: &Grid, center: f64, width: f64) -> Vec<f64> {
    grid.xs().iter().map(|&x| (-((x - center) / width).powi(2)).exp()).collect()
}

fn comoving_cfg(c: f64, t_end: f64) -> SchemeConfig {
    SchemeConfig { dt: DT, frame_speed: c, bc: Bc::Neumann, record_every: RECORD_EVERY, t_end }
}

/// Full system in the frame of speed `c` from `base + amplitude·g` in `u`.
pub fn comoving_run(base: &State, params: &Params, c: f64, g: &[f64], amplitude: f64, t_end: f64) -> Result<Trajectory> {
    let cfg = comoving_cfg(c, t_end);
    let mut init = base.clone();
    for (u, gi) in init.u.iter_mut().zip(g) {
        *u += amplitude * gi;
    }
    Stepper::new(base.grid, *params, &cfg)?.run(&init, &cfg, &[])
}

/// Linearization about the frozen `base` in the frame of speed `c`, started
/// from `amplitude·g` in `u`.
pub fn linearized_run(base: &State, params: &Params, c: f64, g: &[f64], amplitude: f64, t_end: f64) -> Result<Trajectory> {
    let cfg = comoving_cfg(c, t_end);
    let init = State::new(base.grid, 0.0, g.iter().map(|v| amplitude * v).collect(), vec![0.0; base.grid.n])?;
    Stepper::linearized(base.grid, *params, &cfg, &base.u, None)?.run(&init, &cfg, &[])
}

/// Natural continuation of a wave train in `(ε, c)` along a straight line.
pub fn continue_wavetrain(params: &Params, wt: &WaveTrain, eps: f64, c: f64, steps: usize) -> Result<WaveTrain> {
    let mut cur = wt.clone();
    let (e0, c0) = (params.eps, wt.c);
    for j in 1..=steps {
        let s = j as f64 / steps as f64;
        let p = Params { eps: e0 + s * (eps - e0), ..*params };
        cur = solve_wavetrain(&p, c0 + s * (c - c0), &cur)?;
    }
    Ok(cur)
}
