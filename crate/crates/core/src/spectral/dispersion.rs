//! Linear dispersion relation about the unstable rest state, its double
//! roots, the pinching test and the linear spreading speed.

use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Params;

const RESIDUAL_TOL: f64 = 1e-10;
const DERIV_TOL: f64 = 1e-8;
/// Real-part excursion `S` along which colliding roots are tracked.
const PINCH_EXCURSION: f64 = 10.0;
const PINCH_OFFSET: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersionRoot {
    pub lambda: C,
    pub nu: C,
    pub c: f64,
    pub pinched: bool,
}

/// `det[Dν² + cν + F'(0) − λ]` assembled from its entries.
pub fn dispersion(params: &Params, c: f64, lambda: C, nu: C) -> C {
    let j = crate::model::jacobian(params, 0.0, 0.0);
    let m11 = nu * nu + c * nu + j[0][0] - lambda;
    let m12 = C::from(j[0][1]);
    let m21 = C::from(j[1][0]);
    let m22 = c * nu + j[1][1] - lambda;
    m11 * m22 - m12 * m21
}

/// `(d, ∂λ d, ∂ν d, ∂λ∂ν d, ∂ν² d)`.
fn derivs(p: &Params, c: f64, lambda: C, nu: C) -> [C; 5] {
    let alpha = p.alpha();
    let pp = nu * nu + c * nu + alpha - lambda;
    let q = c * nu - p.eps * p.gamma - lambda;
    let pn = 2.0 * nu + c;
    let d = pp * q + p.eps;
    let d_l = -q - pp;
    let d_n = pn * q + c * pp;
    let d_nl = -pn - c;
    let d_nn = 2.0 * q + 2.0 * c * pn;
    [d, d_l, d_n, d_nl, d_nn]
}

/// Newton iteration on `d = ∂ν d = 0` from `seed`; the pinching flag is
/// filled in by tracking the colliding spatial roots.
pub fn double_root(params: &Params, c: f64, seed: (C, C)) -> Result<DispersionRoot> {
    let (lambda, nu) = newton(params, c, seed).ok_or(Error::NoRoot)?;
    let pinched = is_pinched(params, c, lambda, nu)?;
    Ok(DispersionRoot { lambda, nu, c, pinched })
}

fn newton(p: &Params, c: f64, seed: (C, C)) -> Option<(C, C)> {
    let (mut l, mut n) = seed;
    for _ in 0..60 {
        let [d, d_l, d_n, d_nl, d_nn] = derivs(p, c, l, n);
        // rows: (d, ∂ν d); columns: (λ, ν)
        let det = d_l * d_nn - d_n * d_nl;
        if det.norm() < 1e-300 {
            return None;
        }
        let dl = -(d * d_nn - d_n * d_n) / det;
        let dn = -(d_l * d_n - d_nl * d) / det;
        l += dl;
        n += dn;
        if !(l.norm().is_finite() && n.norm().is_finite()) || l.norm() > 1e6 {
            return None;
        }
        if dl.norm().max(dn.norm()) < 1e-14 * (1.0 + l.norm() + n.norm()) {
            break;
        }
    }
    let [d, _, d_n, _, _] = derivs(p, c, l, n);
    (d.norm() <= RESIDUAL_TOL && d_n.norm() <= DERIV_TOL).then_some((l, n))
}

/// Roots in `ν` of the cubic `d_c(λ, ·)`.
pub fn spatial_roots(params: &Params, c: f64, lambda: C) -> [C; 3] {
    let alpha = params.alpha();
    // (ν² + cν + α − λ)(cν − εγ − λ) + ε = c ν³ + b ν² + e ν + f
    let q0 = -params.eps * params.gamma - lambda;
    let a3 = C::from(c);
    let a2 = c * c + q0;
    let a1 = c * q0 + c * (alpha - lambda);
    let a0 = (alpha - lambda) * q0 + params.eps;
    cubic_roots([a3, a2, a1, a0])
}

/// Roots of `a₃x³ + a₂x² + a₁x + a₀` by Durand–Kerner, polished by Newton.
fn cubic_roots(a: [C; 3 + 1]) -> [C; 3] {
    let (b2, b1, b0) = (a[1] / a[0], a[2] / a[0], a[3] / a[0]);
    let p = |x: C| ((x + b2) * x + b1) * x + b0;
    let dp = |x: C| (3.0 * x + 2.0 * b2) * x + b1;
    let scale = 1.0 + b2.norm().max(b1.norm()).max(b0.norm());
    let seed = C::new(0.4, 0.9);
    let mut z = [seed * scale, seed * seed * scale, seed * seed * seed * scale];
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..3 {
            let mut den = C::new(1.0, 0.0);
            for j in 0..3 {
                if i != j {
                    den *= z[i] - z[j];
                }
            }
            let step = p(z[i]) / den;
            z[i] -= step;
            moved = moved.max(step.norm());
        }
        if moved < 1e-15 * scale {
            break;
        }
    }
    for zi in &mut z {
        for _ in 0..3 {
            let d = dp(*zi);
            if d.norm() > 0.0 {
                *zi -= p(*zi) / d;
            }
        }
    }
    z
}

/// Follows the roots from `λ* + 1e−4` to `λ* + S` along the real direction,
/// matching the three roots between steps by the best permutation, and
/// checks whether the two roots that collide at `ν*` end on opposite sides
/// of the imaginary axis.
pub fn is_pinched(params: &Params, c: f64, lambda: C, nu: C) -> Result<bool> {
    let mut cur = spatial_roots(params, c, lambda + PINCH_OFFSET);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| (cur[i] - nu).norm().total_cmp(&(cur[j] - nu).norm()));
    let (ia, ib) = (order[0], order[1]);
    let mut s = PINCH_OFFSET;
    let mut max_sep = (cur[ia] - cur[ib]).norm();
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    while s < PINCH_EXCURSION {
        s = (s * 1.05 + 1e-4).min(PINCH_EXCURSION);
        let new = spatial_roots(params, c, lambda + s);
        let best = PERMS
            .iter()
            .min_by(|p, q| {
                let cost = |perm: &[usize; 3]| (0..3).map(|k| (new[perm[k]] - cur[k]).norm()).sum::<f64>();
                cost(p).total_cmp(&cost(q))
            })
            .unwrap();
        cur = [new[best[0]], new[best[1]], new[best[2]]];
        max_sep = max_sep.max((cur[ia] - cur[ib]).norm());
    }
    if max_sep < 1e-6 {
        return Err(Error::PinchingUndetermined);
    }
    Ok((cur[ia].re > 0.0) != (cur[ib].re > 0.0))
}

/// All distinct double roots reached from a coarse grid of seeds.
pub fn double_roots(params: &Params, c: f64) -> Vec<DispersionRoot> {
    let mut found: Vec<(C, C)> = Vec::new();
    let lin = |lo: f64, hi: f64, n: usize| (0..n).map(move |i| lo + (hi - lo) * i as f64 / (n - 1) as f64);
    // scalar-factor root first, then the grid
    let mut seeds = vec![(C::from(params.alpha() - c * c / 4.0), C::from(-c / 2.0))];
    for lr in lin(-0.3, 0.3, 13) {
        for li in lin(-0.3, 0.3, 13) {
            for nr in lin(-1.5, 1.0, 11) {
                seeds.push((C::new(lr, li), C::from(nr)));
            }
        }
    }
    for seed in seeds {
        if let Some((l, n)) = newton(params, c, seed) {
            if !found.iter().any(|(fl, fn_)| (fl - l).norm() + (fn_ - n).norm() < 1e-7) {
                found.push((l, n));
            }
        }
    }
    let mut out: Vec<DispersionRoot> = found
        .into_iter()
        .filter_map(|(lambda, nu)| {
            is_pinched(params, c, lambda, nu).ok().map(|pinched| DispersionRoot { lambda, nu, c, pinched })
        })
        .collect();
    out.sort_by(|a, b| b.lambda.re.total_cmp(&a.lambda.re));
    out
}

/// Rightmost pinched double root at speed `c`.
pub fn rightmost_pinched(params: &Params, c: f64) -> Option<DispersionRoot> {
    double_roots(params, c).into_iter().find(|r| r.pinched)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpreadingSpeed {
    pub c_lin: f64,
    pub eta_lin: f64,
    pub root: DispersionRoot,
}

/// Speed at which the rightmost pinched double root crosses `Re λ = 0`.
pub fn linear_spreading_speed(params: &Params) -> Result<SpreadingSpeed> {
    let growth = |c: f64| rightmost_pinched(params, c).map(|r| r.lambda.re);
    let mut prev: Option<(f64, f64)> = None;
    let mut bracket = None;
    for i in 1..=100 {
        let c = 0.05 * i as f64;
        let Some(g) = growth(c) else { continue };
        if let Some((pc, pg)) = prev {
            if pg > 0.0 && g <= 0.0 {
                bracket = Some((pc, c));
                break;
            }
        }
        prev = Some((c, g));
    }
    let (mut lo, mut hi) = bracket.ok_or(Error::NoSpreadingSpeed)?;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        match growth(mid) {
            Some(g) if g > 0.0 => lo = mid,
            Some(_) => hi = mid,
            None => return Err(Error::NoSpreadingSpeed),
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    let c_lin = 0.5 * (lo + hi);
    let root = rightmost_pinched(params, c_lin).ok_or(Error::NoSpreadingSpeed)?;
    Ok(SpreadingSpeed { c_lin, eta_lin: -root.nu.re, root })
}
