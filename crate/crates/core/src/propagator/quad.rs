use std::f64::consts::{FRAC_PI_2, PI};
use std::num::NonZeroUsize;
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use gauss_quad::GaussLegendre;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gl_rule(order: usize) -> Vec<(f64, f64)> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Vec<(f64, f64)>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let mut map = cache.lock().expect("quadrature cache poisoned");
    map.entry(order)
        .or_insert_with(|| {
            let rule = GaussLegendre::new(NonZeroUsize::new(order).expect("order > 0"));
            let mut v: Vec<(f64, f64)> = rule.as_node_weight_pairs().to_vec();
            v.sort_by(|a, b| a.0.total_cmp(&b.0));
            v
        })
        .clone()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadRule {
    pub panels: usize,
    pub order: usize,
}

impl Default for QuadRule {
    fn default() -> Self {
        QuadRule { panels: 64, order: 8 }
    }
}

impl QuadRule {
    pub fn refined(self) -> QuadRule {
        QuadRule { panels: self.panels * 2, order: self.order }
    }

    /// Composite nodes and weights on `[a, b]`.
    pub fn nodes(&self, a: f64, b: f64) -> Vec<(f64, f64)> {
        let rule = gl_rule(self.order);
        let h = (b - a) / self.panels as f64;
        let mut out = Vec::with_capacity(self.panels * self.order);
        for p in 0..self.panels {
            let mid = a + (p as f64 + 0.5) * h;
            for &(x, w) in &rule {
                out.push((mid + 0.5 * h * x, 0.5 * h * w));
            }
        }
        out
    }

    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes(a, b).into_iter().map(|(x, w)| w * f(x)).sum()
    }

    /// Tensor-product nodes on the box `[lo_i, hi_i]`.
    pub fn box_nodes(&self, lo: &[f64], hi: &[f64]) -> Vec<(Vec<f64>, f64)> {
        let mut out = vec![(Vec::new(), 1.0)];
        for (a, b) in lo.iter().zip(hi) {
            let axis = self.nodes(*a, *b);
            let mut next = Vec::with_capacity(out.len() * axis.len());
            for (p, w) in &out {
                for &(x, wx) in &axis {
                    let mut q = p.clone();
                    q.push(x);
                    next.push((q, w * wx));
                }
            }
            out = next;
        }
        out
    }

    /// `∫_ℝ f` through `x = s tan θ`; needs `f = O(|x|^{-2})`.
    pub fn integrate_line(&self, scale: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.integrate(-FRAC_PI_2, FRAC_PI_2, |th| {
            let c = th.cos();
            if c <= 0.0 {
                return 0.0;
            }
            let x = scale * th.tan();
            f(x) * scale / (c * c)
        })
    }
}

/// `∫_x^∞ sin(u)/u du` for `x > 0`, through the auxiliary Laplace integrals
/// `f(x) = ∫_0^∞ e^{-xt}/(1+t²) dt` and `g(x) = ∫_0^∞ t e^{-xt}/(1+t²) dt`.
pub fn sine_integral_tail(x: f64) -> f64 {
    assert!(x > 0.0);
    if x < 4.0 {
        return FRAC_PI_2 - sine_series(x);
    }
    let rule = QuadRule { panels: 40, order: 16 };
    // substitute s = x t over s ∈ [0, 60]
    let f = rule.integrate(0.0, 60.0, |s| (-s).exp() / (1.0 + (s / x).powi(2))) / x;
    let g = rule.integrate(0.0, 60.0, |s| (-s).exp() * (s / x) / (1.0 + (s / x).powi(2))) / x;
    f * x.cos() + g * x.sin()
}

fn sine_series(x: f64) -> f64 {
    let mut term = x;
    let mut sum = x;
    let mut n = 0.0;
    while term.abs() > 1e-18 * sum.abs().max(1.0) {
        n += 1.0;
        let k = 2.0 * n;
        term *= -x * x / (k * (k + 1.0));
        sum += term / (k + 1.0);
    }
    sum
}

pub fn sine_integral(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let s = x.signum();
    s * (FRAC_PI_2 - sine_integral_tail(x.abs()))
}

pub const TWO_PI: f64 = 2.0 * PI;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sine_integral_values() {
        // Si(1) = 0.946083070367183, Si(10) = 1.658347594218874
        assert!((sine_integral(1.0) - 0.946_083_070_367_183).abs() < 1e-12);
        assert!((sine_integral(10.0) - 1.658_347_594_218_874).abs() < 1e-12);
        assert!((sine_integral_tail(500.0) - (500f64).cos() / 500.0).abs() < 1e-5);
    }

    #[test]
    fn composite_rule_and_line() {
        let r = QuadRule::default();
        assert!((r.integrate(0.0, PI, f64::sin) - 2.0).abs() < 1e-13);
        let v = r.integrate_line(1.0, |x| 1.0 / (1.0 + x * x));
        assert!((v - PI).abs() < 1e-12);
        let b = r.box_nodes(&[0.0, 0.0], &[1.0, 2.0]);
        let area: f64 = b.iter().map(|(_, w)| w).sum();
        assert!((area - 2.0).abs() < 1e-12);
    }
}
