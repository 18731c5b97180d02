//! Band-stored matrices and an LU solver with partial pivoting.
//!
//! The factorization follows the LAPACK `gbtrf` layout: row interchanges are
//! confined to the `kl` rows below the diagonal, so the upper factor grows to
//! bandwidth `kl + ku` and the multipliers of each elimination step are kept
//! apart from the upper factor.

use crate::error::{Error, Result};

/// Pivots smaller than this are treated as zero.
pub const PIVOT_THRESHOLD: f64 = 1e-300;

/// Square matrix with `kl` sub-diagonals and `ku` super-diagonals.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    // row-major, row i holds columns i-kl ..= i+ku
    data: Vec<f64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Shape("banded matrix needs n >= 1".into()));
        }
        if (kl >= n || ku >= n) && n > 1 {
            return Err(Error::Shape(format!(
                "bandwidths ({kl}, {ku}) must be smaller than n = {n}"
            )));
        }
        if n == 1 && (kl > 0 || ku > 0) {
            return Err(Error::Shape("a 1x1 matrix has zero bandwidth".into()));
        }
        Ok(Self {
            n,
            kl,
            ku,
            data: vec![0.0; n * (kl + ku + 1)],
        })
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut m = Self::zeros(n, 0, 0)?;
        for i in 0..n {
            m.set(i, i, 1.0)?;
        }
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lower_bandwidth(&self) -> usize {
        self.kl
    }

    pub fn upper_bandwidth(&self) -> usize {
        self.ku
    }

    fn width(&self) -> usize {
        self.kl + self.ku + 1
    }

    fn in_band(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && j + self.kl >= i && j <= i + self.ku
    }

    fn offset(&self, i: usize, j: usize) -> usize {
        i * self.width() + (j + self.kl - i)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if self.in_band(i, j) {
            self.data[self.offset(i, j)]
        } else {
            0.0
        }
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) -> Result<()> {
        if !self.in_band(i, j) {
            return Err(Error::Shape(format!(
                "entry ({i}, {j}) lies outside the band (kl = {}, ku = {}, n = {})",
                self.kl, self.ku, self.n
            )));
        }
        let k = self.offset(i, j);
        self.data[k] = value;
        Ok(())
    }

    /// Adds `value` to entry `(i, j)`.
    pub fn add(&mut self, i: usize, j: usize, value: f64) -> Result<()> {
        if !self.in_band(i, j) {
            return Err(Error::Shape(format!(
                "entry ({i}, {j}) lies outside the band (kl = {}, ku = {}, n = {})",
                self.kl, self.ku, self.n
            )));
        }
        let k = self.offset(i, j);
        self.data[k] += value;
        Ok(())
    }

    /// Columns of row `i` that lie inside the band.
    pub fn row_columns(&self, i: usize) -> std::ops::Range<usize> {
        i.saturating_sub(self.kl)..(i + self.ku + 1).min(self.n)
    }

    pub fn scale_row(&mut self, i: usize, factor: f64) {
        for j in self.row_columns(i) {
            let k = self.offset(i, j);
            self.data[k] *= factor;
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(Error::Shape(format!(
                "vector of length {} for a {}x{} matrix",
                x.len(),
                self.n,
                self.n
            )));
        }
        Ok((0..self.n)
            .map(|i| self.row_columns(i).map(|j| self.get(i, j) * x[j]).sum())
            .collect())
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row_columns(i).map(|j| self.get(i, j).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).collect())
            .collect()
    }

    /// LU factorization with partial pivoting.
    pub fn factor(&self) -> Result<BandedLu> {
        BandedLu::new(self)
    }
}

/// LU factors of a [`BandedMatrix`], reusable for many right-hand sides.
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    // upper factor, row k holds columns k ..= k+kl+ku
    upper: Vec<f64>,
    upper_width: usize,
    // multipliers of step k for rows k+1 ..= k+kl
    multipliers: Vec<f64>,
    pivots: Vec<usize>,
}

impl BandedLu {
    fn new(m: &BandedMatrix) -> Result<Self> {
        let n = m.n;
        let kl = m.kl;
        let uw = kl + m.ku + 1;
        // working rows: row i stores columns i ..= i+kl+ku after elimination,
        // but before elimination row i starts at column i-kl. Use a window of
        // columns [i-kl, i+kl+ku] per row.
        let ww = 2 * kl + m.ku + 1;
        let mut work = vec![0.0; n * ww];
        let widx = |i: usize, j: usize| i * ww + (j + kl - i);
        for i in 0..n {
            for j in m.row_columns(i) {
                work[widx(i, j)] = m.get(i, j);
            }
        }
        let scale = m
            .data
            .iter()
            .fold(0.0f64, |a, v| a.max(v.abs()));
        let tiny = PIVOT_THRESHOLD.max(scale * f64::EPSILON * 1e-6);

        let mut multipliers = vec![0.0; n * kl.max(1)];
        let mut pivots = vec![0; n];
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let last_col = (k + kl + m.ku).min(n - 1);
            let mut p = k;
            let mut best = work[widx(k, k)].abs();
            for i in k + 1..=last_row {
                let v = work[widx(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if !(best > tiny) {
                return Err(Error::Singular(format!(
                    "pivot {best:e} at column {k} is below threshold"
                )));
            }
            pivots[k] = p;
            if p != k {
                for j in k..=last_col {
                    work.swap(widx(k, j), widx(p, j));
                }
            }
            let pivot = work[widx(k, k)];
            for i in k + 1..=last_row {
                let l = work[widx(i, k)] / pivot;
                multipliers[k * kl + (i - k - 1)] = l;
                work[widx(i, k)] = 0.0;
                if l != 0.0 {
                    for j in k + 1..=last_col {
                        let u = work[widx(k, j)];
                        work[widx(i, j)] -= l * u;
                    }
                }
            }
        }

        let mut upper = vec![0.0; n * uw];
        for k in 0..n {
            for j in k..(k + uw).min(n) {
                upper[k * uw + (j - k)] = work[widx(k, j)];
            }
        }
        Ok(Self {
            n,
            kl,
            upper,
            upper_width: uw,
            multipliers,
            pivots,
        })
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        if rhs.len() != self.n {
            return Err(Error::Shape(format!(
                "right-hand side of length {} for a system of size {}",
                rhs.len(),
                self.n
            )));
        }
        let n = self.n;
        let mut y = rhs.to_vec();
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                y.swap(k, p);
            }
            let yk = y[k];
            if yk != 0.0 {
                for i in k + 1..=(k + self.kl).min(n - 1) {
                    y[i] -= self.multipliers[k * self.kl + (i - k - 1)] * yk;
                }
            }
        }
        let uw = self.upper_width;
        for k in (0..n).rev() {
            let row = &self.upper[k * uw..(k + 1) * uw];
            let mut acc = y[k];
            for j in k + 1..(k + uw).min(n) {
                acc -= row[j - k] * y[j];
            }
            y[k] = acc / row[0];
        }
        Ok(y)
    }
}

/// Solves `m · y = rhs`.
pub fn solve_banded(m: &BandedMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    if rhs.len() != m.n() {
        return Err(Error::Shape(format!(
            "right-hand side of length {} for a system of size {}",
            rhs.len(),
            m.n()
        )));
    }
    m.factor()?.solve(rhs)
}
