use invasionlab_core::front::{default_level, front_position};
use invasionlab_core::{Bc, Grid, Params, SchemeConfig, State, Stepper};

fn cfg(bc: Bc, c: f64, t_end: f64) -> SchemeConfig {
    SchemeConfig { dt: 0.02, frame_speed: c, bc, record_every: 50, t_end }
}

#[test]
fn rest_state_is_exactly_preserved() {
    let g = Grid::new(-10.0, 10.0, 201).unwrap();
    for bc in [Bc::Neumann, Bc::Periodic] {
        let c = cfg(bc, 0.3, 5.0);
        let traj = Stepper::new(g, Params::default(), &c).unwrap().run(&State::zeros(g), &c, &[]).unwrap();
        assert!(traj.snapshots.iter().all(|s| s.u.iter().chain(&s.w).all(|&v| v == 0.0)));
    }
}

#[test]
fn fourier_mode_follows_the_symbol() {
    // symbol M = jacobian(0,0) − diag(k², 0) has a complex pair at k = 0.2;
    // exp(MT) = e^{τT}[cos(μT) I + sin(μT)/μ (M − τI)], τ = tr/2, μ² = det − τ²
    let p = Params::default();
    let k = 0.2;
    let (m11, m21) = (p.a * (1.0 - p.a) - k * k, p.eps);
    let m22 = -p.eps * p.gamma;
    let tau = 0.5 * (m11 + m22);
    let mu = (m11 * m22 + m21 - tau * tau).sqrt();
    let t_end = 300.0;
    let exact = |u0: f64| {
        let e = (tau * t_end).exp();
        e * u0 * ((mu * t_end).cos() + (mu * t_end).sin() / mu * (m11 - tau))
    };

    let n = (20.0 * 2.0 * std::f64::consts::PI / k / 0.1).round() as usize;
    let h = 20.0 * 2.0 * std::f64::consts::PI / k / n as f64;
    let g = Grid::new(0.0, (n - 1) as f64 * h, n).unwrap();
    let sc = SchemeConfig { dt: 0.02, frame_speed: 0.0, bc: Bc::Periodic, record_every: 500, t_end };
    let init = State::from_fn(g, |x| (1e-8 * (k * x).cos(), 0.0));
    let traj = Stepper::new(g, p, &sc).unwrap().run(&init, &sc, &[]).unwrap();
    let last = traj.last().unwrap();
    let amp = 2.0 / n as f64 * last.u.iter().enumerate().map(|(i, u)| u * (k * g.x(i)).cos()).sum::<f64>();
    let want = exact(1e-8);
    let scale = 1e-8 * (tau * t_end).exp();
    assert!((amp - want).abs() < 1e-3 * scale, "{amp} vs {want}");
}

#[test]
fn comoving_frame_matches_shifted_lab_run() {
    // c·T is a whole number of cells, so the two runs sample the same points
    let p = Params::default();
    let g = Grid::new(0.0, 199.9, 2000).unwrap();
    let init = State::from_fn(g, |x| (0.6 * (-((x - 100.0) / 6.0).powi(2)).exp(), 0.0));
    let (c, t) = (0.5, 20.0);
    let lab = cfg(Bc::Periodic, 0.0, t);
    let mov = cfg(Bc::Periodic, c, t);
    let a = Stepper::new(g, p, &lab).unwrap().run(&init, &lab, &[]).unwrap();
    let b = Stepper::new(g, p, &mov).unwrap().run(&init, &mov, &[]).unwrap();
    let (ua, ub) = (&a.last().unwrap().u, &b.last().unwrap().u);
    let shift = (c * t / g.h()).round() as usize;
    let err = (0..g.n).map(|i| (ub[i] - ua[(i + shift) % g.n]).abs()).fold(0.0, f64::max);
    assert!(err < 2e-2, "{err}");
}

#[test]
fn bump_invades_monotonically() {
    let p = Params::default();
    let g = Grid::with_spacing(-100.0, 100.0, 0.1).unwrap();
    let init = State::from_fn(g, |x| (0.5 * (-((x + 85.0) / 5.0).powi(2)).exp(), 0.0));
    let sc = cfg(Bc::Neumann, 0.0, 150.0);
    let sc = SchemeConfig { record_every: 500, ..sc };
    let traj = Stepper::new(g, p, &sc).unwrap().run(&init, &sc, &[]).unwrap();
    let pos: Vec<f64> =
        traj.snapshots.iter().skip(3).map(|s| front_position(s, default_level(&p)).unwrap()).collect();
    assert!(pos.windows(2).all(|w| w[1] > w[0]), "{pos:?}");
}

#[test]
fn linearized_zero_stays_zero() {
    let g = Grid::new(-20.0, 20.0, 401).unwrap();
    let frozen: Vec<f64> = g.xs().iter().map(|x| 0.5 * (1.0 - x.tanh())).collect();
    let sc = cfg(Bc::Neumann, 0.7, 2.0);
    let traj = Stepper::linearized(g, Params::default(), &sc, &frozen, None).unwrap().run(&State::zeros(g), &sc, &[]).unwrap();
    assert!(traj.last().unwrap().u.iter().all(|&v| v == 0.0));
}
