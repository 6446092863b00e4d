use std::collections::HashMap;
use std::sync::Arc;

use super::{decay_operators, unpack, Kernel};
use crate::norm::{MultiIndex, NormElement, SaturatedSet};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeminormOptions {
    /// Coefficients with `|δ| > delta_max` are reported as `+inf`.
    pub delta_max: u32,
}

impl Default for SeminormOptions {
    fn default() -> Self {
        SeminormOptions { delta_max: 4 }
    }
}

/// Sum in ascending order so the result does not depend on entry order.
fn ordered_sum(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v.iter().sum()
}

struct Flat {
    points: Vec<[usize; super::MAX_SLOTS]>,
    abs: Vec<f64>,
}

impl Kernel {
    fn flat(&self) -> Flat {
        let mut points = Vec::with_capacity(self.len());
        let mut abs = Vec::with_capacity(self.len());
        for (k, v) in self.entries() {
            points.push(unpack(k, self.arity()));
            abs.push(v.norm());
        }
        Flat { points, abs }
    }

    fn scalar_from(&self, flat: &Flat, weights: impl Fn(usize) -> f64) -> f64 {
        let lat = self.lattice();
        let w = lat.cell_volume();
        let (m, n) = (self.m(), self.n());
        if m == 0 && n == 0 {
            return 0.0;
        }
        if m == 0 {
            let npts = lat.npts();
            let mut bins: Vec<Vec<f64>> = vec![Vec::new(); n * npts];
            for (e, p) in flat.points.iter().enumerate() {
                let a = flat.abs[e] * weights(e).abs();
                for j0 in 0..n {
                    bins[j0 * npts + p[j0]].push(a);
                }
            }
            bins.into_iter().map(ordered_sum).fold(0.0f64, f64::max) * w.powi(n as i32 - 1)
        } else {
            let mut bins: HashMap<u128, Vec<f64>> = HashMap::new();
            for (e, p) in flat.points.iter().enumerate() {
                bins.entry(super::pack(&p[..m])).or_default().push(flat.abs[e] * weights(e).abs());
            }
            bins.into_values().map(ordered_sum).fold(0.0f64, f64::max) * w.powi(n as i32)
        }
    }

    /// Scalar `L1-L∞` norm.
    pub fn norm_1inf_scalar(&self) -> f64 {
        let flat = self.flat();
        self.scalar_from(&flat, |_| 1.0)
    }

    /// `max_{δ(D) = δ} |||D f|||_{1,∞}` over canonical decay operators on the
    /// internal slots; 0 when no operator exists.
    pub fn max_decay_norm(&self, delta: &MultiIndex) -> f64 {
        let flat = self.flat();
        self.max_decay_from(&flat, delta)
    }

    fn max_decay_from(&self, flat: &Flat, delta: &MultiIndex) -> f64 {
        if delta.is_zero() {
            return self.scalar_from(flat, |_| 1.0);
        }
        let lat = self.lattice();
        let m = self.m();
        let mut best: f64 = 0.0;
        for op in decay_operators(self.n(), delta) {
            let weights: Vec<f64> = flat
                .points
                .iter()
                .map(|p| {
                    let mut terms = Vec::new();
                    for fac in &op.factors {
                        for (axis, &e) in fac.delta.0.iter().enumerate() {
                            if e > 0 {
                                terms.push(lat.diff(p[m + fac.u], p[m + fac.v], axis).abs().powi(e as i32));
                            }
                        }
                    }
                    terms.sort_by(f64::total_cmp);
                    terms.iter().product::<f64>()
                })
                .collect();
            best = best.max(self.scalar_from(flat, |e| weights[e]));
        }
        best
    }

    /// The `(d+1)`-dimensional `L1-L∞` seminorm restricted to `domain`.
    pub fn seminorm_1inf(&self, domain: &Arc<SaturatedSet>, opts: SeminormOptions) -> NormElement {
        if self.m() == 0 && self.n() == 0 {
            return NormElement::zero(domain.clone());
        }
        let flat = self.flat();
        if self.m() != 0 {
            return NormElement::constant(domain.clone(), self.scalar_from(&flat, |_| 1.0));
        }
        NormElement::from_fn(domain.clone(), |delta| {
            if delta.len_total() > opts.delta_max {
                f64::INFINITY
            } else {
                self.max_decay_from(&flat, delta) / delta.factorial()
            }
        })
    }

    /// Constant element `sup |C|`.
    pub fn norm_sup(&self, domain: &Arc<SaturatedSet>) -> NormElement {
        NormElement::constant(domain.clone(), self.max_abs())
    }
}
