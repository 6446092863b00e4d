use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernel::Kernel;

/// Antisymmetric matrix stored as its strict upper triangle.
#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceMatrix {
    n: usize,
    upper: Vec<Complex64>,
}

fn tri(n: usize, i: usize, j: usize) -> usize {
    // row-major strict upper triangle, i < j
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

impl CovarianceMatrix {
    pub fn zero(n: usize) -> Self {
        CovarianceMatrix { n, upper: vec![Complex64::default(); n * n.saturating_sub(1) / 2] }
    }

    /// Build from `f(i, j)` evaluated for `i < j` only.
    pub fn from_upper(n: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zero(n);
        for i in 0..n {
            for j in i + 1..n {
                m.upper[tri(n, i, j)] = f(i, j);
            }
        }
        m
    }

    /// Restriction of a two-point kernel to the listed base points. The lower
    /// triangle of the kernel is ignored, which enforces antisymmetry.
    pub fn from_kernel(c: &Kernel, points: &[usize]) -> Result<Self> {
        if c.m() != 0 || c.n() != 2 {
            return Err(Error::usage("covariance needs a two-point kernel"));
        }
        Ok(Self::from_upper(points.len(), |i, j| c.get(&[points[i], points[j]])))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        use std::cmp::Ordering::*;
        match i.cmp(&j) {
            Less => self.upper[tri(self.n, i, j)],
            Greater => -self.upper[tri(self.n, j, i)],
            Equal => Complex64::default(),
        }
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        use std::cmp::Ordering::*;
        match i.cmp(&j) {
            Less => self.upper[tri(self.n, i, j)] = v,
            Greater => self.upper[tri(self.n, j, i)] = -v,
            Equal => {}
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::usage("covariance dimension mismatch"));
        }
        let upper = self.upper.iter().zip(&other.upper).map(|(a, b)| a + b).collect();
        Ok(CovarianceMatrix { n: self.n, upper })
    }

    pub fn scale(&self, s: Complex64) -> Self {
        CovarianceMatrix { n: self.n, upper: self.upper.iter().map(|a| a * s).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.upper.iter().fold(0.0, |a, c| a.max(c.norm()))
    }

    pub fn dense(&self, idx: &[usize]) -> Vec<Vec<Complex64>> {
        idx.iter().map(|&i| idx.iter().map(|&j| self.get(i, j)).collect()).collect()
    }

    /// Pfaffian of the restriction to `idx` (in the given order).
    pub fn pfaffian_of(&self, idx: &[usize]) -> Result<Complex64> {
        if idx.len() % 2 == 1 {
            return Err(Error::usage("pfaffian of an odd-dimensional matrix"));
        }
        if idx.len() <= 8 {
            Ok(pf_expand(&|a, b| self.get(idx[a], idx[b]), &(0..idx.len()).collect::<Vec<_>>()))
        } else {
            Ok(pf_eliminate(self.dense(idx)))
        }
    }

    pub fn pfaffian(&self) -> Result<Complex64> {
        self.pfaffian_of(&(0..self.n).collect::<Vec<_>>())
    }
}

/// Expansion along the first row: `Pf(A) = Σ_j (-1)^{j+1} a_{0j} Pf(A without 0, j)`.
fn pf_expand(a: &dyn Fn(usize, usize) -> Complex64, rows: &[usize]) -> Complex64 {
    match rows.len() {
        0 => Complex64::new(1.0, 0.0),
        2 => a(rows[0], rows[1]),
        _ => {
            let mut acc = Complex64::default();
            let mut rest: Vec<usize> = Vec::with_capacity(rows.len() - 2);
            for j in 1..rows.len() {
                let v = a(rows[0], rows[j]);
                if v == Complex64::default() {
                    continue;
                }
                rest.clear();
                rest.extend(rows[1..].iter().enumerate().filter(|&(k, _)| k + 1 != j).map(|(_, &r)| r));
                let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
                acc += v * sign * pf_expand(a, &rest);
            }
            acc
        }
    }
}

/// Skew-symmetric elimination with column pivoting.
fn pf_eliminate(mut a: Vec<Vec<Complex64>>) -> Complex64 {
    let n = a.len();
    let mut pf = Complex64::new(1.0, 0.0);
    let mut k = 0;
    while k + 1 < n {
        let kp = (k + 1..n)
            .max_by(|&x, &y| a[k][x].norm().total_cmp(&a[k][y].norm()))
            .unwrap();
        if kp != k + 1 {
            a.swap(k + 1, kp);
            for row in a.iter_mut() {
                row.swap(k + 1, kp);
            }
            pf = -pf;
        }
        let piv = a[k][k + 1];
        if piv == Complex64::default() {
            return Complex64::default();
        }
        pf *= piv;
        if k + 2 < n {
            let tau: Vec<Complex64> = (k + 2..n).map(|j| a[k][j] / piv).collect();
            let col: Vec<Complex64> = (k + 2..n).map(|i| a[i][k + 1]).collect();
            for (ii, i) in (k + 2..n).enumerate() {
                for (jj, j) in (k + 2..n).enumerate() {
                    a[i][j] += tau[ii] * col[jj] - col[ii] * tau[jj];
                }
            }
        }
        k += 2;
    }
    pf
}

/// Determinant by partial-pivot LU, used to cross-check Pfaffians.
pub fn determinant(mut a: Vec<Vec<Complex64>>) -> Complex64 {
    let n = a.len();
    let mut det = Complex64::new(1.0, 0.0);
    for k in 0..n {
        let p = (k..n).max_by(|&x, &y| a[x][k].norm().total_cmp(&a[y][k].norm())).unwrap();
        if a[p][k] == Complex64::default() {
            return Complex64::default();
        }
        if p != k {
            a.swap(p, k);
            det = -det;
        }
        det *= a[k][k];
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                let v = a[k][j];
                a[i][j] -= f * v;
            }
        }
    }
    det
}
