//! Front position, speed, comoving profile and leading-edge decay rate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{line_fit, LineFit};
use crate::grid::{Grid, State};
use crate::interp::{gradient, CubicSpline};
use crate::model::Params;
use crate::stepper::Trajectory;

pub const DEFAULT_K: usize = 8;
const ALIGN_WINDOW: f64 = 50.0;
const MAX_ALIGNMENT: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontProfile {
    pub grid: Grid,
    pub u: Vec<f64>,
    pub w: Vec<f64>,
    pub c_ps: f64,
    pub eta_ps: f64,
    pub alignment_residual: f64,
}

impl FrontProfile {
    pub fn state(&self) -> State {
        State { grid: self.grid, t: 0.0, u: self.u.clone(), w: self.w.clone() }
    }

    /// Centered-difference derivative `(u_ps', w_ps')`.
    pub fn derivative(&self) -> (Vec<f64>, Vec<f64>) {
        let h = self.grid.h();
        (gradient(&self.u, h), gradient(&self.w, h))
    }

    /// Profile resampled by cubic splines on `grid` (which must lie inside).
    pub fn resample(&self, grid: Grid) -> Result<FrontProfile> {
        let (lo, hi) = (self.grid.x_min, self.grid.x_max);
        if grid.x_min < lo - 1e-9 || grid.x_max > hi + 1e-9 {
            return Err(Error::InvalidInput("resampling grid leaves the profile domain".into()));
        }
        let su = CubicSpline::uniform(lo, self.grid.h(), &self.u)?;
        let sw = CubicSpline::uniform(lo, self.grid.h(), &self.w)?;
        let xs = grid.xs();
        Ok(FrontProfile {
            grid,
            u: xs.iter().map(|&x| su.eval(x)).collect(),
            w: xs.iter().map(|&x| sw.eval(x)).collect(),
            ..self.clone()
        })
    }

    /// Largest `ξ` with `|u_ps(ξ)| ≥ floor`.
    pub fn support_edge(&self, floor: f64) -> f64 {
        let i = self.u.iter().rposition(|v| v.abs() >= floor).unwrap_or(0);
        self.grid.x(i)
    }
}

/// Rightmost downward crossing of `level` by `u`, linearly interpolated.
pub fn front_position(state: &State, level: f64) -> Result<f64> {
    let u = &state.u;
    for i in (0..u.len() - 1).rev() {
        if u[i] >= level && u[i + 1] < level {
            let s = (u[i] - level) / (u[i] - u[i + 1]);
            return Ok(state.grid.x(i) + s * state.grid.h());
        }
    }
    Err(Error::FrontNotFound { level })
}

pub fn default_level(params: &Params) -> f64 {
    0.5 * (1.0 - params.a)
}

/// Least-squares slope of position against time over the trailing half.
pub fn measure_speed(times: &[f64], positions: &[f64]) -> Result<(f64, f64)> {
    let n = times.len().min(positions.len());
    let start = n / 2;
    if n - start < 10 {
        return Err(Error::InsufficientData(format!("speed needs >= 10 trailing samples, got {}", n - start)));
    }
    let f = line_fit(&times[start..n], &positions[start..n])?;
    Ok((f.slope, f.stderr))
}

/// Front positions of every snapshot where a crossing exists.
pub fn positions(traj: &Trajectory, level: f64) -> (Vec<f64>, Vec<f64>) {
    traj.snapshots
        .iter()
        .filter_map(|s| front_position(s, level).ok().map(|p| (s.t, p)))
        .unzip()
}

/// Aligns the final `k` snapshots at their front positions and averages them.
///
/// `frame_speed` is the speed of the frame the trajectory was computed in;
/// the returned `c_ps` is the lab-frame speed.
pub fn extract_front(traj: &Trajectory, params: &Params, frame_speed: f64) -> Result<FrontProfile> {
    extract_front_k(traj, params, frame_speed, DEFAULT_K)
}

pub fn extract_front_k(traj: &Trajectory, params: &Params, frame_speed: f64, k: usize) -> Result<FrontProfile> {
    let level = default_level(params);
    let (ts, ps) = positions(traj, level);
    let n_snap = traj.snapshots.len();
    if n_snap < k || ts.len() < n_snap / 2 + 1 {
        return Err(Error::InsufficientData("front not formed on the trailing half".into()));
    }
    let (slope, _) = measure_speed(&ts, &ps)?;
    let last: Vec<&State> = traj.snapshots[n_snap - k..].iter().collect();
    let pos: Vec<f64> = last.iter().map(|s| front_position(s, level)).collect::<Result<_>>()?;
    let g = last[0].grid;
    let h = g.h();
    let p_ref = pos[k - 1];
    // ξ_i = x_i − p_ref, kept where every snapshot can be interpolated
    let lo = pos.iter().map(|p| g.x_min - p).fold(f64::MIN, f64::max);
    let hi = pos.iter().map(|p| g.x_max - p).fold(f64::MAX, f64::min);
    let i0 = ((lo + p_ref - g.x_min) / h).ceil().max(0.0) as usize;
    let i1 = ((hi + p_ref - g.x_min) / h).floor().min((g.n - 1) as f64) as usize;
    if i1 <= i0 + 3 {
        return Err(Error::InsufficientData("aligned snapshots do not overlap".into()));
    }
    let grid = Grid::new(g.x(i0) - p_ref, g.x(i1) - p_ref, i1 - i0 + 1)?;
    let xs = grid.xs();
    let mut aligned_u: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut aligned_w: Vec<Vec<f64>> = Vec::with_capacity(k);
    for (s, p) in last.iter().zip(&pos) {
        let su = CubicSpline::uniform(g.x_min, h, &s.u)?;
        let sw = CubicSpline::uniform(g.x_min, h, &s.w)?;
        aligned_u.push(xs.iter().map(|&x| su.eval(x + p)).collect());
        aligned_w.push(xs.iter().map(|&x| sw.eval(x + p)).collect());
    }
    let mut residual: f64 = 0.0;
    for a in 0..k {
        for b in a + 1..k {
            for (i, &x) in xs.iter().enumerate() {
                if x.abs() <= ALIGN_WINDOW {
                    residual = residual.max((aligned_u[a][i] - aligned_u[b][i]).abs());
                }
            }
        }
    }
    if residual > MAX_ALIGNMENT {
        return Err(Error::FrontNotConverged { residual });
    }
    let avg = |rows: &[Vec<f64>]| -> Vec<f64> {
        (0..grid.n).map(|i| rows.iter().map(|r| r[i]).sum::<f64>() / k as f64).collect()
    };
    let mut fp = FrontProfile {
        grid,
        u: avg(&aligned_u),
        w: avg(&aligned_w),
        c_ps: frame_speed + slope,
        eta_ps: f64::NAN,
        alignment_residual: residual,
    };
    fp.eta_ps = fit_tail_decay(&fp)?.0;
    Ok(fp)
}

/// Decay rate of the leading edge from a log-linear fit where
/// `1e−8 ≤ |u| ≤ 1e−2`; returns `(η_ps, fit)`.
pub fn fit_tail_decay(fp: &FrontProfile) -> Result<(f64, LineFit)> {
    tail_fit(&fp.grid, &fp.u, 1e-8, 1e-2)
}

pub fn tail_fit(grid: &Grid, u: &[f64], lo: f64, hi: f64) -> Result<(f64, LineFit)> {
    const FLOOR: f64 = 1e-10;
    // the leading edge starts after the last sample above `hi`
    let Some(last_big) = u.iter().rposition(|v| v.abs() > hi) else {
        return Err(Error::InsufficientDecades { decades: 0.0 });
    };
    let start = last_big + 1;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in start..u.len() {
        let v = u[i].abs();
        if v < lo.max(FLOOR) {
            break;
        }
        xs.push(grid.x(i));
        ys.push(v.ln());
    }
    let decades = if ys.len() >= 2 {
        (ys[0] - ys[ys.len() - 1]) / std::f64::consts::LN_10
    } else {
        0.0
    };
    if decades < 3.0 {
        return Err(Error::InsufficientDecades { decades });
    }
    let f = line_fit(&xs, &ys)?;
    Ok((-f.slope, f))
}
