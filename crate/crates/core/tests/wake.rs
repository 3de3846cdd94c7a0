//! Wave-train and phase checks on the wake of one short invasion run.

use std::sync::OnceLock;

use invasionlab_core::diagnostics::{extract_phase, measure_wavenumber};
use invasionlab_core::front::{default_level, extract_front, front_position};
use invasionlab_core::spectral::{critical_curve, group_velocity_adjoint};
use invasionlab_core::wavetrain::{solve_wavetrain, wavetrain_from_state, DEFAULT_M};
use invasionlab_core::{Bc, Grid, Params, SchemeConfig, State, Stepper, WaveTrain};

struct Wake {
    wt: WaveTrain,
}

fn wake() -> &'static Wake {
    static W: OnceLock<Wake> = OnceLock::new();
    W.get_or_init(|| {
        let p = Params::default();
        let g = Grid::with_spacing(-200.0, 200.0, 0.1).unwrap();
        let init = State::from_fn(g, |x| (0.5 * (-((x + 180.0) / 5.0).powi(2)).exp(), 0.0));
        let sc = SchemeConfig { dt: 0.02, frame_speed: 0.0, bc: Bc::Neumann, record_every: 500, t_end: 400.0 };
        let traj = Stepper::new(g, p, &sc).unwrap().run(&init, &sc, &[]).unwrap();
        let c = extract_front(&traj, &p, 0.0).unwrap().c_ps;
        let last = traj.last().unwrap().clone();
        let pos = front_position(&last, default_level(&p)).unwrap();
        let window = (pos - 250.0, pos - 20.0);
        let guess = wavetrain_from_state(&last, window, c, DEFAULT_M).unwrap();
        let wt = solve_wavetrain(&p, c, &guess).unwrap();
        Wake { wt }
    })
}

#[test]
fn converged_wavetrain_is_a_fixed_point() {
    let w = wake();
    let again = solve_wavetrain(&Params::default(), w.wt.c, &w.wt).unwrap();
    assert!(again.residual <= 1e-12, "{}", again.residual);
    assert!((again.l - w.wt.l).abs() < 1e-9 * w.wt.l);
}

#[test]
fn wavelength_continuous_in_speed() {
    let w = wake();
    let near = solve_wavetrain(&Params::default(), w.wt.c + 1e-3, &w.wt).unwrap();
    assert!((near.l - w.wt.l).abs() / w.wt.l <= 0.05);
}

#[test]
fn wavenumber_of_a_sampled_wavetrain() {
    let w = wake();
    let (iu, iw) = w.wt.interpolant();
    let g = Grid::with_spacing(-500.0, 0.0, 0.1).unwrap();
    let s = State::from_fn(g, |x| (iu.eval(x), iw.eval(x)));
    let k = measure_wavenumber(&s, (-480.0, -20.0)).unwrap();
    assert!(k.coherent);
    assert!((k.k / w.wt.k_wt - 1.0).abs() < 1e-3, "{} vs {}", k.k, w.wt.k_wt);
}

#[test]
fn wavenumber_of_a_sine() {
    let g = Grid::with_spacing(0.0, 400.0, 0.05).unwrap();
    let s = State::from_fn(g, |x| ((0.37 * x).sin(), 0.0));
    let k = measure_wavenumber(&s, (10.0, 390.0)).unwrap();
    assert!((k.k - 0.37).abs() < 1e-4 && k.coherent);
}

#[test]
fn group_velocity_routes_agree() {
    let w = wake();
    let p = Params::default();
    let cc = critical_curve(&p, &w.wt, &[1e-3, 2e-3, 4e-3, 8e-3]).unwrap();
    let ad = group_velocity_adjoint(&p, &w.wt).unwrap();
    assert!(cc.c_g < 0.0 && cc.d_eff > 0.0);
    assert!((cc.c_g - ad.c_g).abs() <= 1e-3 * cc.c_g.abs());
    assert!((ad.normalization - 1.0).abs() < 1e-10);
}

#[test]
fn phase_of_a_shifted_wavetrain_is_constant() {
    let w = wake();
    let (iu, iw) = w.wt.interpolant();
    let shift = 0.3 * w.wt.l;
    let g = Grid::with_spacing(-300.0, 0.0, 0.1).unwrap();
    let s = State::from_fn(g, |x| (iu.eval(x + shift), iw.eval(x + shift)));
    let ph = extract_phase(&s, &w.wt, (-280.0, -20.0), 10).unwrap();
    // phase is defined modulo L
    for &v in &ph.psi {
        let d = (v - shift) - w.wt.l * ((v - shift) / w.wt.l).round();
        assert!(d.abs() < 0.01 * shift, "{v} vs {shift}");
    }
}
