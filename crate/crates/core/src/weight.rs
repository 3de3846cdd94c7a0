//! Two-sided exponential weights `ω_{η−,η+}` and the partition of unity `χ±`.

use serde::{Deserialize, Serialize};

use crate::grid::Grid;

/// Quintic smoothstep on `[0,1]`, clamped outside.
#[inline]
pub fn smoothstep5(z: f64) -> f64 {
    let z = z.clamp(0.0, 1.0);
    z * z * z * (10.0 - 15.0 * z + 6.0 * z * z)
}

#[inline]
fn smoothstep5_d(z: f64) -> f64 {
    if z <= 0.0 || z >= 1.0 {
        0.0
    } else {
        30.0 * z * z * (1.0 - z) * (1.0 - z)
    }
}

/// `∫_0^z smoothstep5`, extended linearly for `z > 1`.
#[inline]
fn smoothstep5_int(z: f64) -> f64 {
    if z <= 0.0 {
        0.0
    } else if z >= 1.0 {
        0.5 + (z - 1.0)
    } else {
        let z4 = z * z * z * z;
        z4 * (2.5 - 3.0 * z + z * z)
    }
}

/// `ω(ξ) = exp(φ(ξ))` with `φ(ξ) = η₋ξ` for `ξ ≤ −1` and `η₊ξ` for `ξ ≥ 1`.
///
/// On `[−1,1]` the slope `φ'` moves from `η₋` to `η₊` along a quintic
/// smoothstep, so `φ` is a degree-six polynomial there and `ω` is monotone
/// whenever both rates share a sign.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weight {
    pub eta_minus: f64,
    pub eta_plus: f64,
}

impl Weight {
    pub const UNIT: Weight = Weight { eta_minus: 0.0, eta_plus: 0.0 };

    pub fn new(eta_minus: f64, eta_plus: f64) -> Self {
        Weight { eta_minus, eta_plus }
    }

    /// `ω₀ = ω_{0,η₀}`.
    pub fn omega0(eta0: f64) -> Self {
        Weight::new(0.0, eta0)
    }

    /// Exponent `φ = log ω` and its first two derivatives.
    pub fn log_derivs(&self, xi: f64) -> (f64, f64, f64) {
        let d = self.eta_plus - self.eta_minus;
        if xi <= -1.0 {
            return (self.eta_minus * xi, self.eta_minus, 0.0);
        }
        if xi >= 1.0 {
            return (self.eta_plus * xi, self.eta_plus, 0.0);
        }
        // ∫_{−1}^ξ B5((s+1)/2) ds = 2∫_0^z B5, equal to ξ once ξ ≥ 1
        let z = 0.5 * (xi + 1.0);
        let phi = self.eta_minus * xi + d * 2.0 * smoothstep5_int(z);
        (phi, self.eta_minus + d * smoothstep5(z), 0.5 * d * smoothstep5_d(z))
    }

    pub fn log_eval(&self, xi: f64) -> f64 {
        self.log_derivs(xi).0
    }

    pub fn eval(&self, xi: f64) -> f64 {
        self.log_eval(xi).exp()
    }

    pub fn sample(&self, grid: &Grid) -> Vec<f64> {
        grid.xs().into_iter().map(|x| self.eval(x)).collect()
    }
}

/// `χ₋(ξ) = B(−ξ)`: 1 for `ξ ≤ −1`, 0 for `ξ ≥ 0`.
pub fn chi_minus(xi: f64) -> f64 {
    smoothstep5(-xi)
}

pub fn chi_plus(xi: f64) -> f64 {
    1.0 - chi_minus(xi)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    Sup,
    L2,
}

/// Weighted sup norm or trapezoid L² norm of `values` sampled on `grid`.
pub fn weighted_norm(values: &[f64], grid: &Grid, weight: &Weight, kind: NormKind) -> f64 {
    let xs = grid.xs();
    match kind {
        NormKind::Sup => values
            .iter()
            .zip(&xs)
            .map(|(v, &x)| weight.eval(x) * v.abs())
            .fold(0.0, f64::max),
        NormKind::L2 => {
            let n = values.len();
            let mut s = 0.0;
            for (i, (v, &x)) in values.iter().zip(&xs).enumerate() {
                let q = (weight.eval(x) * v).powi(2);
                s += if i == 0 || i == n - 1 { 0.5 * q } else { q };
            }
            (s * grid.h()).sqrt()
        }
    }
}
