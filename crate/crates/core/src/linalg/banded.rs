//! Banded matrices, pivoted banded LU, and cyclic (wrap-around) banded solves.

use crate::error::{Error, Result};

/// Square band matrix with `kl` sub- and `ku` super-diagonals, stored row-wise.
#[derive(Debug, Clone, PartialEq)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        BandMatrix { n, kl, ku, data: vec![0.0; n * (kl + ku + 1)] }
    }

    pub fn identity(n: usize, kl: usize, ku: usize) -> Self {
        let mut m = Self::zeros(n, kl, ku);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    #[inline]
    fn in_band(&self, i: usize, j: usize) -> bool {
        j + self.kl >= i && j <= i + self.ku
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        i * (self.kl + self.ku + 1) + (j + self.kl - i)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i < self.n && j < self.n && self.in_band(i, j) {
            self.data[self.idx(i, j)]
        } else {
            0.0
        }
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(self.in_band(i, j), "({i},{j}) outside band");
        let k = self.idx(i, j);
        self.data[k] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(self.in_band(i, j), "({i},{j}) outside band");
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    /// `self ← α·self + β·I`.
    pub fn scale_shift(&mut self, alpha: f64, beta: f64) {
        for v in &mut self.data {
            *v *= alpha;
        }
        for i in 0..self.n {
            self.add(i, i, beta);
        }
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        let w = self.kl + self.ku + 1;
        for i in 0..self.n {
            let j0 = i.saturating_sub(self.kl);
            let j1 = (i + self.ku).min(self.n - 1);
            let row = &self.data[i * w..(i + 1) * w];
            let mut s = 0.0;
            for j in j0..=j1 {
                s += row[j + self.kl - i] * x[j];
            }
            y[i] = s;
        }
    }

    pub fn transpose(&self) -> BandMatrix {
        let mut t = BandMatrix::zeros(self.n, self.ku, self.kl);
        for i in 0..self.n {
            let j0 = i.saturating_sub(self.kl);
            let j1 = (i + self.ku).min(self.n - 1);
            for j in j0..=j1 {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.get(i, j)).collect()).collect()
    }

    pub fn lu(&self) -> Result<BandLu> {
        BandLu::factor(self)
    }
}

/// LU factorization with partial pivoting of a [`BandMatrix`].
///
/// Row `i` of the factor holds columns `i−kl ..= i+kl+ku` to absorb fill-in.
#[derive(Debug, Clone)]
pub struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    data: Vec<f64>,
    piv: Vec<usize>,
}

impl BandLu {
    #[inline]
    fn width(&self) -> usize {
        2 * self.kl + self.ku + 1
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> usize {
        i * self.width() + (j + self.kl - i)
    }

    pub fn factor(a: &BandMatrix) -> Result<Self> {
        let (n, kl, ku) = (a.n, a.kl, a.ku);
        let mut lu = BandLu { n, kl, ku, data: vec![0.0; n * (2 * kl + ku + 1)], piv: vec![0; n] };
        for i in 0..n {
            let j0 = i.saturating_sub(kl);
            let j1 = (i + ku).min(n - 1);
            for j in j0..=j1 {
                let k = lu.at(i, j);
                lu.data[k] = a.get(i, j);
            }
        }
        let scale = a.data.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        for k in 0..n {
            let rmax = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = lu.data[lu.at(k, k)].abs();
            for r in k + 1..=rmax {
                let v = lu.data[lu.at(r, k)].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best <= scale * 1e-300 {
                return Err(Error::Singular(format!("zero pivot in column {k}")));
            }
            lu.piv[k] = p;
            let cmax = (k + kl + ku).min(n - 1);
            if p != k {
                for c in k..=cmax {
                    let (ik, ip) = (lu.at(k, c), lu.at(p, c));
                    lu.data.swap(ik, ip);
                }
            }
            let pivot = lu.data[lu.at(k, k)];
            for r in k + 1..=rmax {
                let irk = lu.at(r, k);
                let l = lu.data[irk] / pivot;
                lu.data[irk] = l;
                if l != 0.0 {
                    for c in k + 1..=cmax {
                        let v = lu.data[lu.at(k, c)];
                        let irc = lu.at(r, c);
                        lu.data[irc] -= l * v;
                    }
                }
            }
        }
        Ok(lu)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            if bk != 0.0 {
                for r in k + 1..=(k + kl).min(n - 1) {
                    b[r] -= self.data[self.at(r, k)] * bk;
                }
            }
        }
        for k in (0..n).rev() {
            let mut s = b[k];
            for c in k + 1..=(k + kl + ku).min(n - 1) {
                s -= self.data[self.at(k, c)] * b[c];
            }
            b[k] = s / self.data[self.at(k, k)];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

/// Band matrix plus a few entries outside the band (periodic wrap-around).
#[derive(Debug, Clone)]
pub struct CyclicBand {
    pub band: BandMatrix,
    pub corners: Vec<(usize, usize, f64)>,
}

impl CyclicBand {
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        self.band.matvec(x, y);
        for &(i, j, v) in &self.corners {
            y[i] += v * x[j];
        }
    }

    pub fn factor(&self) -> Result<CyclicLu> {
        CyclicLu::new(self)
    }
}

/// Woodbury solver for `B + Σ e_i c_iᵀ` with `B` banded and the corner rows
/// `c_i` collected into a low-rank update.
#[derive(Debug, Clone)]
pub struct CyclicLu {
    lu: BandLu,
    rows: Vec<usize>,
    // corner entries per update row
    vt: Vec<Vec<(usize, f64)>>,
    // columns B⁻¹ e_i
    z: Vec<Vec<f64>>,
    // LU of the capacitance matrix I + Vᵀ Z (dense, small)
    cap: Vec<Vec<f64>>,
    cap_piv: Vec<usize>,
}

impl CyclicLu {
    fn new(a: &CyclicBand) -> Result<Self> {
        let lu = a.band.lu()?;
        let n = a.band.n;
        let mut rows: Vec<usize> = a.corners.iter().map(|c| c.0).collect();
        rows.sort_unstable();
        rows.dedup();
        let vt: Vec<Vec<(usize, f64)>> = rows
            .iter()
            .map(|&r| a.corners.iter().filter(|c| c.0 == r).map(|c| (c.1, c.2)).collect())
            .collect();
        let z: Vec<Vec<f64>> = rows
            .iter()
            .map(|&r| {
                let mut e = vec![0.0; n];
                e[r] = 1.0;
                lu.solve_in_place(&mut e);
                e
            })
            .collect();
        let k = rows.len();
        let mut cap = vec![vec![0.0; k]; k];
        for (i, row) in vt.iter().enumerate() {
            for (j, zj) in z.iter().enumerate() {
                cap[i][j] = row.iter().map(|&(c, v)| v * zj[c]).sum::<f64>();
            }
            cap[i][i] += 1.0;
        }
        let cap_piv = dense_lu(&mut cap)?;
        Ok(CyclicLu { lu, rows, vt, z, cap, cap_piv })
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        self.lu.solve_in_place(b);
        if self.rows.is_empty() {
            return;
        }
        let mut y: Vec<f64> = self.vt.iter().map(|row| row.iter().map(|&(c, v)| v * b[c]).sum()).collect();
        dense_solve(&self.cap, &self.cap_piv, &mut y);
        for (zj, yj) in self.z.iter().zip(&y) {
            for (bi, zi) in b.iter_mut().zip(zj) {
                *bi -= zi * yj;
            }
        }
    }
}

/// In-place dense LU with partial pivoting; returns the pivot rows.
pub fn dense_lu(a: &mut [Vec<f64>]) -> Result<Vec<usize>> {
    let n = a.len();
    let mut piv = vec![0; n];
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))
            .unwrap_or(k);
        if a[p][k] == 0.0 {
            return Err(Error::Singular(format!("dense pivot {k}")));
        }
        piv[k] = p;
        a.swap(k, p);
        for r in k + 1..n {
            let l = a[r][k] / a[k][k];
            a[r][k] = l;
            for c in k + 1..n {
                a[r][c] -= l * a[k][c];
            }
        }
    }
    Ok(piv)
}

pub fn dense_solve(lu: &[Vec<f64>], piv: &[usize], b: &mut [f64]) {
    let n = lu.len();
    for k in 0..n {
        b.swap(k, piv[k]);
        for r in k + 1..n {
            b[r] -= lu[r][k] * b[k];
        }
    }
    for k in (0..n).rev() {
        let mut s = b[k];
        for c in k + 1..n {
            s -= lu[k][c] * b[c];
        }
        b[k] = s / lu[k][k];
    }
}
