use std::sync::Arc;

use num_complex::Complex64;

use crate::norm::{MultiIndex, SaturatedSet};

/// Truncated multivariate Taylor expansion `Σ_δ c_δ h^δ` of a function
/// around a point; `D^δ f = δ! c_δ`.
#[derive(Clone, Debug)]
pub struct Jet {
    set: Arc<SaturatedSet>,
    c: Vec<Complex64>,
}

impl Jet {
    pub fn constant(set: &Arc<SaturatedSet>, v: Complex64) -> Jet {
        let mut c = vec![Complex64::default(); set.len()];
        c[0] = v;
        Jet { set: set.clone(), c }
    }

    pub fn real(set: &Arc<SaturatedSet>, v: f64) -> Jet {
        Self::constant(set, Complex64::new(v, 0.0))
    }

    /// Coordinate `axis` expanded at `value`.
    pub fn variable(set: &Arc<SaturatedSet>, axis: usize, value: f64) -> Jet {
        let mut j = Self::real(set, value);
        let unit = MultiIndex::unit(set.dim(), axis);
        if let Some(p) = set.position(&unit) {
            j.c[p] = Complex64::new(1.0, 0.0);
        }
        j
    }

    /// Variables `k_0, …, k_d` at `point`.
    pub fn variables(set: &Arc<SaturatedSet>, point: &[f64]) -> Vec<Jet> {
        point.iter().enumerate().map(|(a, &v)| Self::variable(set, a, v)).collect()
    }

    pub fn value(&self) -> Complex64 {
        self.c[0]
    }

    pub fn coeff(&self, delta: &MultiIndex) -> Complex64 {
        self.set.position(delta).map_or(Complex64::default(), |p| self.c[p])
    }

    /// `D^δ f` at the expansion point.
    pub fn derivative(&self, delta: &MultiIndex) -> Complex64 {
        self.coeff(delta) * delta.factorial()
    }

    pub fn set(&self) -> &Arc<SaturatedSet> {
        &self.set
    }

    pub fn add(&self, o: &Jet) -> Jet {
        Jet { set: self.set.clone(), c: self.c.iter().zip(&o.c).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, o: &Jet) -> Jet {
        Jet { set: self.set.clone(), c: self.c.iter().zip(&o.c).map(|(a, b)| a - b).collect() }
    }

    pub fn scale(&self, s: Complex64) -> Jet {
        Jet { set: self.set.clone(), c: self.c.iter().map(|a| a * s).collect() }
    }

    pub fn add_const(&self, v: Complex64) -> Jet {
        let mut j = self.clone();
        j.c[0] += v;
        j
    }

    pub fn mul(&self, o: &Jet) -> Jet {
        let c = self
            .set
            .splits()
            .iter()
            .map(|pairs| pairs.iter().map(|&(i, k)| self.c[i] * o.c[k]).sum())
            .collect();
        Jet { set: self.set.clone(), c }
    }

    /// `f(a + h) = Σ_n f⁽ⁿ⁾(a)/n! h^n` given `derivs[n] = f⁽ⁿ⁾(a)`.
    pub fn compose(&self, derivs: &[Complex64]) -> Jet {
        let mut h = self.clone();
        h.c[0] = Complex64::default();
        let mut power = Jet::real(&self.set, 1.0);
        let mut acc = Jet::constant(&self.set, derivs[0]);
        let mut fact = 1.0;
        for (n, d) in derivs.iter().enumerate().skip(1) {
            power = power.mul(&h);
            fact *= n as f64;
            acc = acc.add(&power.scale(d / fact));
        }
        acc
    }

    fn order(&self) -> usize {
        self.set.members().iter().map(|m| m.len_total() as usize).max().unwrap_or(0)
    }

    pub fn recip(&self) -> Jet {
        let a = self.value();
        let q = self.order();
        // d^n/dx^n x^{-1} = (-1)^n n! x^{-n-1}
        let mut derivs = Vec::with_capacity(q + 1);
        let mut fact = 1.0;
        for n in 0..=q {
            if n > 0 {
                fact *= n as f64;
            }
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            derivs.push(sign * fact / a.powi(n as i32 + 1));
        }
        self.compose(&derivs)
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        self.compose(&vec![e; self.order() + 1])
    }

    pub fn cos(&self) -> Jet {
        let a = self.value();
        let cycle = [a.cos(), -a.sin(), -a.cos(), a.sin()];
        self.compose(&(0..=self.order()).map(|n| cycle[n % 4]).collect::<Vec<_>>())
    }

    pub fn powi(&self, n: u32) -> Jet {
        let mut acc = Jet::real(&self.set, 1.0);
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn zero_like(&self) -> Jet {
        Jet::real(&self.set, 0.0)
    }
}

/// `exp(-1/y)` for `y > 0`, `0` otherwise, with derivatives.
pub fn smooth_ramp(y: &Jet) -> Jet {
    if y.value().re <= 0.0 {
        return y.zero_like();
    }
    y.recip().scale(Complex64::new(-1.0, 0.0)).exp()
}

/// Smooth step rising from 0 at `y <= 0` to 1 at `y >= 1`.
pub fn smooth_step(y: &Jet) -> Jet {
    let a = smooth_ramp(y);
    let b = smooth_ramp(&y.scale(Complex64::new(-1.0, 0.0)).add_const(Complex64::new(1.0, 0.0)));
    if b.value().re == 0.0 && b.c.iter().all(|c| *c == Complex64::default()) {
        return Jet::real(y.set(), if y.value().re > 0.0 { 1.0 } else { 0.0 });
    }
    a.mul(&a.add(&b).recip())
}

/// Plateau equal to 1 on `|x| <= inner`, vanishing for `|x| >= outer`.
pub fn plateau(x: &Jet, inner: f64, outer: f64) -> Jet {
    let w = outer - inner;
    let one = Complex64::new(1.0, 0.0);
    let right = smooth_step(&x.scale(Complex64::new(-1.0 / w, 0.0)).add_const(one * (outer / w)));
    let left = smooth_step(&x.scale(Complex64::new(1.0 / w, 0.0)).add_const(one * (outer / w)));
    right.mul(&left)
}

pub fn plateau_value(x: f64, inner: f64, outer: f64) -> f64 {
    let ramp = |y: f64| if y <= 0.0 { 0.0 } else { (-1.0 / y).exp() };
    let step = |y: f64| {
        let a = ramp(y);
        let b = ramp(1.0 - y);
        if a + b == 0.0 {
            0.0
        } else {
            a / (a + b)
        }
    };
    let w = outer - inner;
    step((outer - x) / w) * step((outer + x) / w)
}
