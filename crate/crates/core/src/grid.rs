use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform grid `x_i = x_min + i·h`, `h = (x_max − x_min)/(n − 1)`.
///
/// With periodic boundary conditions sample `n` is identified with sample 0,
/// so the period is `n·h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        let g = Grid { x_min, x_max, n };
        g.validate()?;
        Ok(g)
    }

    /// Grid with spacing `h` starting at `x_min` and reaching at least `x_max`
    /// up to rounding.
    pub fn with_spacing(x_min: f64, x_max: f64, h: f64) -> Result<Self> {
        if !(h > 0.0) {
            return Err(Error::InvalidInput("spacing must be positive".into()));
        }
        let n = ((x_max - x_min) / h).round() as usize + 1;
        Grid::new(x_min, x_min + (n - 1) as f64 * h, n)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::InvalidInput(format!("grid needs n >= 3, got {}", self.n)));
        }
        if !(self.x_max > self.x_min) || !self.x_min.is_finite() || !self.x_max.is_finite() {
            return Err(Error::InvalidInput("grid needs x_min < x_max".into()));
        }
        Ok(())
    }

    #[inline]
    pub fn h(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n - 1) as f64
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.h()
    }

    pub fn xs(&self) -> Vec<f64> {
        let h = self.h();
        (0..self.n).map(|i| self.x_min + i as f64 * h).collect()
    }

    /// Index of the sample nearest to `x`, clamped to the grid.
    pub fn nearest(&self, x: f64) -> usize {
        let i = ((x - self.x_min) / self.h()).round();
        i.clamp(0.0, (self.n - 1) as f64) as usize
    }

    /// Same grid moved by `s` (samples at `x_i + s`).
    pub fn shifted(&self, s: f64) -> Grid {
        Grid { x_min: self.x_min + s, x_max: self.x_max + s, n: self.n }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub grid: Grid,
    pub t: f64,
    pub u: Vec<f64>,
    pub w: Vec<f64>,
}

impl State {
    pub fn new(grid: Grid, t: f64, u: Vec<f64>, w: Vec<f64>) -> Result<Self> {
        let s = State { grid, t, u, w };
        s.check()?;
        Ok(s)
    }

    pub fn zeros(grid: Grid) -> Self {
        State { grid, t: 0.0, u: vec![0.0; grid.n], w: vec![0.0; grid.n] }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> (f64, f64)) -> Self {
        let (u, w) = grid.xs().into_iter().map(f).unzip();
        State { grid, t: 0.0, u, w }
    }

    pub fn check(&self) -> Result<()> {
        for v in [&self.u, &self.w] {
            if v.len() != self.grid.n {
                return Err(Error::GridMismatch { expected: self.grid.n, got: v.len() });
            }
        }
        if !self.is_finite() {
            return Err(Error::InvalidInput("state contains non-finite samples".into()));
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().chain(self.w.iter()).all(|v| v.is_finite())
    }
}
