use std::fmt::Debug;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Coefficient ring of a Grassmann element.
pub trait Coeff: Clone + Debug + PartialEq + Send + Sync + 'static {
    /// Largest generator count an element over this ring may have.
    const MAX_GENERATORS: usize;

    fn zero() -> Self;
    fn from_complex(c: Complex64) -> Self;
    fn is_zero(&self) -> bool;
    fn add_assign(&mut self, other: &Self);
    fn mul(&self, other: &Self) -> Self;
    fn scale(&self, s: Complex64) -> Self;
    /// Lowest coupling order with a nonzero component (`usize::MAX` for zero).
    fn min_order(&self) -> usize;
    /// Highest coupling order the ring retains.
    fn max_order() -> usize;
    fn exp(&self) -> Self;
    fn ln(&self) -> Result<Self>;
    fn inv(&self) -> Result<Self>;
    /// Largest modulus among the components.
    fn magnitude(&self) -> f64;

    fn one() -> Self {
        Self::from_complex(Complex64::new(1.0, 0.0))
    }

    fn neg(&self) -> Self {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Coeff for Complex64 {
    const MAX_GENERATORS: usize = 22;

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }

    fn from_complex(c: Complex64) -> Self {
        c
    }

    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }

    fn add_assign(&mut self, other: &Self) {
        *self += other;
    }

    fn mul(&self, other: &Self) -> Self {
        self * other
    }

    fn scale(&self, s: Complex64) -> Self {
        self * s
    }

    fn min_order(&self) -> usize {
        if self.is_zero() {
            usize::MAX
        } else {
            0
        }
    }

    fn max_order() -> usize {
        0
    }

    fn exp(&self) -> Self {
        Complex64::exp(*self)
    }

    fn ln(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::domain("logarithm of zero body"));
        }
        Ok(Complex64::ln(*self))
    }

    fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::domain("inverse of zero body"));
        }
        Ok(1.0 / self)
    }

    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// Polynomial in the coupling `λ` truncated after order `K - 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LamPoly<const K: usize>(pub [Complex64; K]);

impl<const K: usize> LamPoly<K> {
    pub fn monomial(order: usize, c: Complex64) -> Self {
        let mut p = [Complex64::new(0.0, 0.0); K];
        if order < K {
            p[order] = c;
        }
        LamPoly(p)
    }

    pub fn coeff(&self, order: usize) -> Complex64 {
        self.0.get(order).copied().unwrap_or_default()
    }

    /// `Σ_k c_k λ^k`.
    pub fn eval(&self, lam: Complex64) -> Complex64 {
        self.0.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * lam + c)
    }

    fn sub_body(&self) -> Self {
        let mut q = *self;
        q.0[0] = Complex64::new(0.0, 0.0);
        q
    }
}

impl<const K: usize> Coeff for LamPoly<K> {
    const MAX_GENERATORS: usize = 64;

    fn zero() -> Self {
        LamPoly([Complex64::new(0.0, 0.0); K])
    }

    fn from_complex(c: Complex64) -> Self {
        LamPoly::monomial(0, c)
    }

    fn is_zero(&self) -> bool {
        self.0.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    fn add_assign(&mut self, other: &Self) {
        for (a, b) in self.0.iter_mut().zip(other.0.iter()) {
            *a += b;
        }
    }

    fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for i in 0..K {
            if self.0[i].re == 0.0 && self.0[i].im == 0.0 {
                continue;
            }
            for j in 0..K - i {
                out.0[i + j] += self.0[i] * other.0[j];
            }
        }
        out
    }

    fn scale(&self, s: Complex64) -> Self {
        let mut out = *self;
        for c in out.0.iter_mut() {
            *c *= s;
        }
        out
    }

    fn min_order(&self) -> usize {
        self.0
            .iter()
            .position(|c| c.re != 0.0 || c.im != 0.0)
            .unwrap_or(usize::MAX)
    }

    fn max_order() -> usize {
        K - 1
    }

    fn exp(&self) -> Self {
        let q = self.sub_body();
        let mut term = Self::one();
        let mut acc = Self::one();
        for j in 1..K {
            term = term.mul(&q).scale(Complex64::new(1.0 / j as f64, 0.0));
            acc.add_assign(&term);
        }
        acc.scale(self.0[0].exp())
    }

    fn ln(&self) -> Result<Self> {
        let b = self.0[0];
        if b.re == 0.0 && b.im == 0.0 {
            return Err(Error::domain("logarithm of a series with zero constant term"));
        }
        let y = self.sub_body().scale(1.0 / b);
        let mut power = Self::one();
        let mut acc = Self::from_complex(b.ln());
        for j in 1..K {
            power = power.mul(&y);
            let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
            acc.add_assign(&power.scale(Complex64::new(sign / j as f64, 0.0)));
        }
        Ok(acc)
    }

    fn inv(&self) -> Result<Self> {
        let b = self.0[0];
        if b.re == 0.0 && b.im == 0.0 {
            return Err(Error::domain("inverse of a series with zero constant term"));
        }
        let y = self.sub_body().scale(-1.0 / b);
        let mut power = Self::one();
        let mut acc = Self::one();
        for _ in 1..K {
            power = power.mul(&y);
            acc.add_assign(&power);
        }
        Ok(acc.scale(1.0 / b))
    }

    fn magnitude(&self) -> f64 {
        self.0.iter().fold(0.0, |a, c| a.max(c.norm()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn lampoly_series_identities() {
        let p = LamPoly::<4>([c(0.3, 0.1), c(-0.2, 0.4), c(0.5, 0.0), c(0.1, -0.3)]);
        let e = p.exp();
        let back = e.ln().unwrap();
        for k in 0..4 {
            assert!((back.0[k] - p.0[k]).norm() < 1e-14);
        }
        let one = p.exp().mul(&p.exp().inv().unwrap());
        assert!((one.0[0] - c(1.0, 0.0)).norm() < 1e-14);
        assert!(one.0[1..].iter().all(|x| x.norm() < 1e-14));
        // evaluation is a ring map up to truncation
        let q = LamPoly::<4>([c(1.0, 0.0), c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let lam = c(1e-3, 2e-3);
        let prod = p.mul(&q).eval(lam);
        assert!((prod - p.eval(lam) * q.eval(lam)).norm() < 1e-8);
    }

    #[test]
    fn orders() {
        let p = LamPoly::<3>::monomial(1, c(2.0, 0.0));
        assert_eq!(p.min_order(), 1);
        assert_eq!(LamPoly::<3>::zero().min_order(), usize::MAX);
        assert_eq!(LamPoly::<3>::max_order(), 2);
        assert!(p.mul(&LamPoly::<3>::monomial(2, c(1.0, 0.0))).is_zero());
        assert!(LamPoly::<3>::zero().ln().is_err());
    }
}
