//! FitzHugh–Nagumo kinetics `u_t = u_xx + f(u) − w`, `w_t = ε(u − γw)` with
//! the cubic `f(u) = u(u+a)(1−u−a)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub a: f64,
    pub gamma: f64,
    pub eps: f64,
    /// Frame speed, when the parameters describe a comoving problem.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
}

impl Default for Params {
    fn default() -> Self {
        Params { a: 0.1, gamma: 2.0, eps: 0.01, c: None }
    }
}

impl Params {
    pub fn new(a: f64, gamma: f64, eps: f64) -> Result<Self> {
        let p = Params { a, gamma, eps, c: None };
        p.validate()?;
        Ok(p)
    }

    pub fn with_speed(mut self, c: f64) -> Self {
        self.c = Some(c);
        self
    }

    /// Checks `0 < a < 1/3`, `0 < γ < 4`, `ε > 0`.
    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.a < 1.0 / 3.0) {
            return Err(Error::InvalidParams(format!("a = {} not in (0, 1/3)", self.a)));
        }
        if !(self.gamma > 0.0 && self.gamma < 4.0) {
            return Err(Error::InvalidParams(format!("gamma = {} not in (0, 4)", self.gamma)));
        }
        if !(self.eps > 0.0) || !self.eps.is_finite() {
            return Err(Error::InvalidParams(format!("eps = {} must be positive", self.eps)));
        }
        if let Some(c) = self.c {
            if !c.is_finite() {
                return Err(Error::InvalidParams("frame speed must be finite".into()));
            }
        }
        Ok(())
    }

    /// Same as [`Params::validate`] but allows `ε = 0` (decoupled scalar limit).
    pub fn validate_allow_zero_eps(&self) -> Result<()> {
        if self.eps == 0.0 {
            Params { eps: 1.0, ..*self }.validate()
        } else {
            self.validate()
        }
    }

    #[inline]
    pub fn f(&self, u: f64) -> f64 {
        u * (u + self.a) * (1.0 - u - self.a)
    }

    #[inline]
    pub fn df(&self, u: f64) -> f64 {
        let a = self.a;
        (u + a) * (1.0 - u - a) + u * (1.0 - u - a) - u * (u + a)
    }

    /// `a(1−a) = f'(0)`.
    #[inline]
    pub fn alpha(&self) -> f64 {
        self.a * (1.0 - self.a)
    }

    /// Largest `|f'(u)|` for `u ∈ [lo, hi]`.
    pub fn max_abs_df(&self, lo: f64, hi: f64) -> f64 {
        // f' is a downward parabola with vertex at (1 − 2a)/3
        let v = (1.0 - 2.0 * self.a) / 3.0;
        let mut m = self.df(lo).abs().max(self.df(hi).abs());
        if v > lo && v < hi {
            m = m.max(self.df(v).abs());
        }
        m
    }

    /// Explicit-reaction step bound `min(0.25, 1/(2 max|∂F/∂u|))` over `u ∈ [lo, hi]`.
    pub fn stability_bound(&self, lo: f64, hi: f64) -> f64 {
        let m = self.max_abs_df(lo, hi).max(self.eps * self.gamma);
        0.25f64.min(0.5 / m)
    }
}

/// `F(u, w) = (f(u) − w, ε(u − γw))`.
#[inline]
pub fn reaction(p: &Params, u: f64, w: f64) -> (f64, f64) {
    (p.f(u) - w, p.eps * (u - p.gamma * w))
}

/// Jacobian of [`reaction`], row-major.
#[inline]
pub fn jacobian(p: &Params, u: f64, _w: f64) -> [[f64; 2]; 2] {
    [[p.df(u), -1.0], [p.eps, -p.eps * p.gamma]]
}
