use std::sync::Arc;

use super::{MultiIndex, NormElement, SaturatedSet};
use crate::error::{Error, Result};

/// Closed-form majorants whose Taylor coefficients are nonnegative.
#[derive(Clone, Debug, PartialEq)]
pub enum Majorant {
    /// `Π_{i=0}^d (1 - a t_i)^{-p}`
    GeomProduct { a: f64, p: u32 },
    /// `λ Π_{i=0}^d (1 - a t_i)^{-1}`
    ScaledGeom { lam: f64, a: f64 },
    /// `num / (1 - den)`
    Quotient { num: Box<Majorant>, den: Box<Majorant> },
    /// `lhs * rhs`
    Product(Box<Majorant>, Box<Majorant>),
}

impl Majorant {
    pub fn quotient(num: Majorant, den: Majorant) -> Self {
        Majorant::Quotient { num: Box::new(num), den: Box::new(den) }
    }

    pub fn product(lhs: Majorant, rhs: Majorant) -> Self {
        Majorant::Product(Box::new(lhs), Box::new(rhs))
    }

    /// Taylor coefficients on `domain`, computed with norm-domain arithmetic.
    pub fn series(&self, domain: &Arc<SaturatedSet>) -> Result<NormElement> {
        match self {
            Majorant::GeomProduct { a, p } => geom_product(domain, *a, *p),
            Majorant::ScaledGeom { lam, a } => Ok(geom_product(domain, *a, 1)?.scale(*lam)),
            Majorant::Quotient { num, den } => {
                let n = num.series(domain)?;
                let g = den.series(domain)?;
                if !(g.constant_term() < 1.0) {
                    return Err(Error::domain("majorant denominator body must be positive"));
                }
                n.mul(&g.geom_inverse(1.0)?)
            }
            Majorant::Product(lhs, rhs) => lhs.series(domain)?.mul(&rhs.series(domain)?),
        }
    }
}

fn geom_product(domain: &Arc<SaturatedSet>, a: f64, p: u32) -> Result<NormElement> {
    if a < 0.0 {
        return Err(Error::domain("geometric factor needs a >= 0"));
    }
    let d = domain.dim();
    let mut acc = NormElement::constant(domain.clone(), 1.0);
    for i in 0..=d {
        let unit = MultiIndex::unit(d, i);
        let factor = match domain.position(&unit) {
            Some(_) => NormElement::monomial(domain.clone(), &unit, a)?.geom_inverse(1.0)?,
            None => NormElement::constant(domain.clone(), 1.0),
        };
        for _ in 0..p {
            acc = acc.mul(&factor)?;
        }
    }
    Ok(acc)
}

/// Scalar functions with nonnegative derivatives at every point of `[0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScalarSeries {
    Exp,
    /// `1 / (1 - z)`
    Geometric,
}

impl ScalarSeries {
    /// `f^{(n)}(x0) / n!`
    pub fn taylor_coeff(self, n: u32, x0: f64) -> Result<f64> {
        match self {
            ScalarSeries::Exp => Ok(x0.exp() / super::factorial(n)),
            ScalarSeries::Geometric => {
                if !(x0 < 1.0) {
                    return Err(Error::domain("geometric series needs x0 < 1"));
                }
                Ok((1.0 - x0).powi(-(n as i32 + 1)))
            }
        }
    }

    /// `Σ_{n < order} f^{(n)}(X_0)/n! (X - X_0)^n`.
    pub fn apply_to_order(self, x: &NormElement, order: u32) -> Result<NormElement> {
        let x0 = x.constant_term();
        let hat = x.without_constant();
        let mut power = NormElement::constant(x.domain().clone(), 1.0);
        let mut acc = NormElement::zero(x.domain().clone());
        for n in 0..order {
            if n > 0 {
                power = power.mul(&hat)?;
            }
            acc = acc.add(&power.scale(self.taylor_coeff(n, x0)?))?;
        }
        Ok(acc)
    }

    /// `f(X)` on the domain: every power of `X - X_0` that survives is kept.
    pub fn apply(self, x: &NormElement) -> Result<NormElement> {
        self.apply_to_order(x, x.domain().nilpotency_order())
    }
}

/// `C = max_{n < N(Δ)} f^{(n)}(X_0) / (n! β^n)`.
pub fn majorant_constant(f: ScalarSeries, x: &NormElement, beta: f64) -> Result<f64> {
    let x0 = x.constant_term();
    if !(beta > 0.0) || !(beta * x0 < 1.0) {
        return Err(Error::domain("need 0 < beta < 1/X_0"));
    }
    let mut c: f64 = 0.0;
    for n in 0..x.domain().n_of() {
        c = c.max(f.taylor_coeff(n, x0)? / beta.powi(n as i32));
    }
    Ok(c)
}
