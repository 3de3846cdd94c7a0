//! Fixtures shared by the benchmarks.

use invasionlab_core::wavetrain::{solve_wavetrain, wavetrain_from_state, DEFAULT_M};
use invasionlab_core::{Bc, Grid, Params, Result, SchemeConfig, State, Stepper, WaveTrain};

/// Bump at the left end of `[−half, half]` with `h = 0.1`.
pub fn bump_state(half: f64) -> State {
    let grid = Grid::with_spacing(-half, half, 0.1).expect("valid grid");
    State::from_fn(grid, |x| (0.5 * (-((x + half - 20.0) / 5.0).powi(2)).exp(), 0.0))
}

/// Wave train left behind by a short invasion run, solved at speed `c`.
pub fn wake_wavetrain(params: &Params, c: f64) -> Result<WaveTrain> {
    let init = bump_state(200.0);
    let cfg = SchemeConfig { dt: 0.02, frame_speed: 0.0, bc: Bc::Neumann, record_every: 5000, t_end: 400.0 };
    let traj = Stepper::new(init.grid, *params, &cfg)?.run(&init, &cfg, &[])?;
    let last = traj.last().expect("at least one record");
    let guess = wavetrain_from_state(last, (-180.0, 40.0), c, DEFAULT_M)?;
    solve_wavetrain(params, c, &guess)
}
