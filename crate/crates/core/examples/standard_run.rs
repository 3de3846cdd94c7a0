//! Standard invasion run followed by the wave-train and spectral pipeline.

use std::time::Instant;

use invasionlab_core::front::{extract_front, front_position};
use invasionlab_core::spectral::{self, PointSpectrumOptions};
use invasionlab_core::wavetrain::{self, wavetrain_from_state};
use invasionlab_core::{Bc, Grid, Params, SchemeConfig, State};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = Params::default();
    let grid = Grid::new(-400.0, 400.0, 8001)?;
    let init = State::from_fn(grid, |x| (0.5 * (-((x + 380.0) / 5.0).powi(2)).exp(), 0.0));
    let cfg = SchemeConfig { dt: 0.02, frame_speed: 0.0, bc: Bc::Neumann, record_every: 500, t_end: 900.0 };
    let t0 = Instant::now();
    let traj = invasionlab_core::stepper::run(&init, &p, &cfg, &[])?;
    println!("simulate {:.1}s", t0.elapsed().as_secs_f64());
    let fp = extract_front(&traj, &p, 0.0)?;
    println!("c_ps {:.5} eta_ps {:.4} align {:.2e}", fp.c_ps, fp.eta_ps, fp.alignment_residual);
    let last = traj.last().unwrap();
    let pos = front_position(last, 0.45)?;
    let guess = wavetrain_from_state(last, (pos - 300.0, pos - 20.0), fp.c_ps, 256)?;
    let t0 = Instant::now();
    let wt = wavetrain::solve_wavetrain(&p, fp.c_ps, &guess)?;
    println!("wavetrain L {:.4} eps L {:.4} res {:.1e} ({:.1}s)", wt.l, p.eps * wt.l, wt.residual, t0.elapsed().as_secs_f64());
    let q = wavetrain::wavelength_quadrature(&p)?;
    println!("quadrature {:?} sum {:.4}", q, q.sum());
    let t0 = Instant::now();
    let bs = spectral::bloch_sweep(&p, &wt, 64)?;
    println!(
        "bloch zero {:.2e} gap {:.3e} theta {:.3e} maxre {:.3e} viol {:?} ({:.1}s)",
        bs.zero_eigenvalue, bs.gap, bs.theta_fit, bs.max_re_nonzero_k, bs.violations, t0.elapsed().as_secs_f64()
    );
    let cc = spectral::critical_curve(&p, &wt, &[1e-3, 2e-3, 4e-3, 8e-3])?;
    let ga = spectral::group_velocity_adjoint(&p, &wt)?;
    println!("c_g branch {:.6} D_eff {:.4} lambda0 {:.1e} | adjoint {:.6} printed {:.6}", cc.c_g, cc.d_eff, cc.lambda0, ga.c_g, ga.printed_formula_value);
    let t0 = Instant::now();
    let sp = spectral::linear_spreading_speed(&p)?;
    println!("c_lin {:.5} eta_lin {:.5} ({:.1}s)", sp.c_lin, sp.eta_lin, t0.elapsed().as_secs_f64());
    let t0 = Instant::now();
    let eta0 = 0.5 * (sp.eta_lin + fp.eta_ps);
    println!("front grid {:?}", fp.grid);
    let rep = spectral::front_point_spectrum(&fp, &p, 0.1, eta0, &PointSpectrumOptions::default())?;
    println!(
        "point lambda {:.3e} next {:.3e} angle {:.4} check {:.1e} ({:.1}s)",
        rep.eigenvalue_nearest_zero, rep.next_eigenvalue, rep.angle, rep.ptr_normalization_check, t0.elapsed().as_secs_f64()
    );
    for (l, r) in [((-150.0, -60.0), (20.0, 60.0)), ((-250.0, -40.0), (20.0, 100.0))] {
        println!("tails {:?}", spectral::point::adjoint_tail_rates(&rep, l, r)?);
    }
    Ok(())
}
