//! Gapped momentum-space propagators, their lattice kernels and the
//! covariance bounds built from them.

mod bounds;
mod jet;
mod position;
pub mod quad;

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::norm::SaturatedSet;

pub use bounds::{check_norms, measured_ratio, CountertermSeries, GramReport, Measure, NormMode, SBound, Variant};
pub use jet::{plateau, plateau_value, smooth_step, Jet};
pub use position::{dual_axis, dual_grid};
pub use quad::QuadRule;

/// Closed-form dispersion relations `e(k)`.
#[derive(Clone, Debug, PartialEq)]
pub enum Dispersion {
    /// `e ≡ Λ`.
    Constant { lambda: f64 },
    /// `e(k) = c₀ + Σ cᵢ cos kᵢ`.
    Cosine { c0: f64, c: Vec<f64> },
    /// `e(k) = gap + a |k|²`.
    Quadratic { gap: f64, a: f64 },
}

impl Dispersion {
    pub fn eval(&self, k: &[f64]) -> f64 {
        match self {
            Dispersion::Constant { lambda } => *lambda,
            Dispersion::Cosine { c0, c } => c0 + c.iter().zip(k).map(|(ci, ki)| ci * ki.cos()).sum::<f64>(),
            Dispersion::Quadratic { gap, a } => gap + a * k.iter().map(|x| x * x).sum::<f64>(),
        }
    }

    pub fn jet(&self, k: &[Jet], set: &Arc<SaturatedSet>) -> Jet {
        match self {
            Dispersion::Constant { lambda } => Jet::real(set, *lambda),
            Dispersion::Cosine { c0, c } => c
                .iter()
                .zip(k)
                .fold(Jet::real(set, *c0), |acc, (ci, ki)| acc.add(&ki.cos().scale(Complex64::new(*ci, 0.0)))),
            Dispersion::Quadratic { gap, a } => k
                .iter()
                .fold(Jet::real(set, *gap), |acc, ki| acc.add(&ki.mul(ki).scale(Complex64::new(*a, 0.0)))),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Dispersion::Constant { lambda } => json!({"type": "constant", "lambda": lambda}),
            Dispersion::Cosine { c0, c } => json!({"type": "cosine", "c0": c0, "c": c}),
            Dispersion::Quadratic { gap, a } => json!({"type": "quadratic", "gap": gap, "a": a}),
        }
    }
}

/// Ultraviolet cutoff `U(k)`.
#[derive(Clone, Debug, PartialEq)]
pub enum Cutoff {
    /// `U ≡ 1` on the Brillouin zone `|kᵢ| ≤ π/dxᵢ`.
    Unit,
    /// Product of smooth plateaus, 1 for `|kᵢ| ≤ inner`, 0 for `|kᵢ| ≥ outer`.
    Bump { inner: f64, outer: f64 },
}

/// `χ(k) = amp · plateau(k₀; inner, outer) · U(k)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Chi {
    pub amp: f64,
    pub inner: f64,
    pub outer: f64,
}

/// `δe(k) = c₀ + c₁ Σ cos kᵢ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Counterterm {
    pub c0: f64,
    pub c1: f64,
}

impl Counterterm {
    pub fn eval(&self, k: &[f64]) -> f64 {
        self.c0 + self.c1 * k.iter().map(|x| x.cos()).sum::<f64>()
    }

    pub fn jet(&self, k: &[Jet], set: &Arc<SaturatedSet>) -> Jet {
        k.iter()
            .fold(Jet::real(set, self.c0), |acc, ki| acc.add(&ki.cos().scale(Complex64::new(self.c1, 0.0))))
    }
}

/// Full description of `C(k) = (U(k) - χ(k)) / (ik₀ - e(k) + δe(k))`.
#[derive(Clone, Debug)]
pub struct PropagatorSpec {
    pub d: usize,
    pub dispersion: Dispersion,
    pub cutoff: Cutoff,
    pub chi: Option<Chi>,
    pub counterterm: Option<Counterterm>,
    /// Gap: `|e| ≥ mu` on the support of `U`.
    pub mu: f64,
    /// Spatial and temporal differentiability budgets.
    pub r: u32,
    pub r0: u32,
    pub dx: Vec<f64>,
    pub quad: QuadRule,
    e_sup: f64,
}

impl PropagatorSpec {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        d: usize,
        dispersion: Dispersion,
        cutoff: Cutoff,
        chi: Option<Chi>,
        counterterm: Option<Counterterm>,
        mu: f64,
        r: u32,
        r0: u32,
        dx: Vec<f64>,
    ) -> Result<Self> {
        if d == 0 || dx.len() != d || dx.iter().any(|&h| !(h > 0.0)) {
            return Err(Error::usage("propagator needs d >= 1 and one positive spacing per axis"));
        }
        if !(mu > 0.0) {
            return Err(Error::domain("gap mu must be positive"));
        }
        if let Dispersion::Cosine { c, .. } = &dispersion {
            if c.len() != d {
                return Err(Error::usage("cosine dispersion needs one amplitude per axis"));
            }
        }
        if let Cutoff::Bump { inner, outer } = cutoff {
            let zone = dx.iter().fold(f64::INFINITY, |a, h| a.min(PI / h));
            if !(0.0 <= inner && inner < outer && outer <= zone) {
                return Err(Error::domain("bump cutoff needs 0 <= inner < outer <= pi/dx"));
            }
        }
        if let Some(ch) = chi {
            if !(0.0..=1.0).contains(&ch.amp) || !(0.0 <= ch.inner && ch.inner < ch.outer) {
                return Err(Error::domain("chi needs 0 <= amp <= 1 and 0 <= inner < outer"));
            }
        }
        let mut spec = PropagatorSpec {
            d,
            dispersion,
            cutoff,
            chi,
            counterterm,
            mu,
            r,
            r0,
            dx,
            quad: QuadRule::default(),
            e_sup: 0.0,
        };
        let mut e_sup: f64 = 0.0;
        for k in spec.support_grid(201) {
            if spec.u(&k) == 0.0 {
                continue;
            }
            let e = spec.dispersion.eval(&k);
            if e.abs() < mu * (1.0 - 1e-12) {
                return Err(Error::domain(format!("gap condition |e(k)| >= mu fails at k = {k:?} (e = {e})")));
            }
            if spec.e_eff(&k) == 0.0 {
                return Err(Error::domain("counterterm closes the gap on the support"));
            }
            e_sup = e_sup.max(e.abs());
        }
        spec.e_sup = e_sup;
        Ok(spec)
    }

    /// `e(k) = 2 + cos k` in one dimension with `U ≡ 1` over the zone.
    pub fn cosine_band() -> Self {
        Self::new(1, Dispersion::Cosine { c0: 2.0, c: vec![1.0] }, Cutoff::Unit, None, None, 1.0, 4, 4, vec![1.0])
            .expect("preset is valid")
    }

    /// `e(k) = -2 - cos k`: the band lies below the chemical potential, so
    /// equal-time contractions do not vanish.
    pub fn filled_band() -> Self {
        Self::new(1, Dispersion::Cosine { c0: -2.0, c: vec![-1.0] }, Cutoff::Unit, None, None, 1.0, 4, 4, vec![1.0])
            .expect("preset is valid")
    }

    pub fn with_quad(mut self, quad: QuadRule) -> Self {
        self.quad = quad;
        self
    }

    pub fn zone(&self) -> Vec<f64> {
        self.dx.iter().map(|h| PI / h).collect()
    }

    /// Box `[lo, hi]` containing the support of `U`.
    pub fn support_box(&self) -> (Vec<f64>, Vec<f64>) {
        let hi = match self.cutoff {
            Cutoff::Unit => self.zone(),
            Cutoff::Bump { outer, .. } => vec![outer; self.d],
        };
        (hi.iter().map(|x| -x).collect(), hi)
    }

    fn support_grid(&self, per_axis: usize) -> Vec<Vec<f64>> {
        let (lo, hi) = self.support_box();
        let mut out = vec![Vec::new()];
        for a in 0..self.d {
            let mut next = Vec::new();
            for p in &out {
                for i in 0..per_axis {
                    let x = lo[a] + (hi[a] - lo[a]) * i as f64 / (per_axis - 1) as f64;
                    let mut q = p.clone();
                    q.push(x);
                    next.push(q);
                }
            }
            out = next;
        }
        out
    }

    /// `sup_{supp U} |e|`.
    pub fn e_sup(&self) -> f64 {
        self.e_sup
    }

    /// `E = max{1, sup_{supp U} |e|}`.
    pub fn big_e(&self) -> f64 {
        self.e_sup.max(1.0)
    }

    pub fn u(&self, k: &[f64]) -> f64 {
        match self.cutoff {
            Cutoff::Unit => {
                if k.iter().zip(self.zone()).all(|(x, z)| x.abs() <= z) {
                    1.0
                } else {
                    0.0
                }
            }
            Cutoff::Bump { inner, outer } => k.iter().map(|&x| plateau_value(x, inner, outer)).product(),
        }
    }

    pub fn u_jet(&self, k: &[Jet], set: &Arc<SaturatedSet>) -> Jet {
        match self.cutoff {
            Cutoff::Unit => Jet::real(set, self.u(&k.iter().map(|j| j.value().re).collect::<Vec<_>>())),
            Cutoff::Bump { inner, outer } => {
                k.iter().fold(Jet::real(set, 1.0), |acc, x| acc.mul(&plateau(x, inner, outer)))
            }
        }
    }

    pub fn chi_value(&self, k0: f64, k: &[f64]) -> f64 {
        self.chi.map_or(0.0, |c| c.amp * plateau_value(k0, c.inner, c.outer) * self.u(k))
    }

    /// Effective dispersion `e - δe`.
    pub fn e_eff(&self, k: &[f64]) -> f64 {
        self.dispersion.eval(k) - self.counterterm.map_or(0.0, |c| c.eval(k))
    }

    pub fn delta_e(&self, k: &[f64]) -> f64 {
        self.counterterm.map_or(0.0, |c| c.eval(k))
    }

    /// `C(k)`.
    pub fn c_k(&self, k0: f64, k: &[f64]) -> Complex64 {
        let num = self.u(k) - self.chi_value(k0, k);
        if num == 0.0 {
            return Complex64::default();
        }
        num / Complex64::new(-self.e_eff(k), k0)
    }

    /// Taylor jet of `C` at `(k₀, k)` over the multiindices of `set`.
    pub fn c_jet(&self, point: &[f64], set: &Arc<SaturatedSet>) -> Jet {
        let vars = Jet::variables(set, point);
        let (k0, k) = (&vars[0], &vars[1..]);
        let u = self.u_jet(k, set);
        let num = match self.chi {
            Some(c) => u.sub(&plateau(k0, c.inner, c.outer).mul(&u).scale(Complex64::new(c.amp, 0.0))),
            None => u,
        };
        let mut e = self.dispersion.jet(k, set);
        if let Some(ct) = self.counterterm {
            e = e.sub(&ct.jet(k, set));
        }
        let den = k0.scale(Complex64::new(0.0, 1.0)).sub(&e);
        num.mul(&den.recip())
    }

    /// Exact partial Fourier transform in `k₀` of a χ-free form.
    pub fn c_time_kernel(&self, t: f64, k: &[f64]) -> Result<f64> {
        if self.chi.is_some() {
            return Err(Error::usage("closed-form time kernel needs a chi-free propagator"));
        }
        Ok(self.u(k) * time_kernel(self.e_eff(k), t))
    }

    /// `C(t, k)` for any form: closed form for the `U` part, quadrature for `χ`.
    pub fn c_time(&self, t: f64, k: &[f64]) -> Complex64 {
        let u = self.u(k);
        if u == 0.0 {
            return Complex64::default();
        }
        let e = self.e_eff(k);
        let base = Complex64::new(u * time_kernel(e, t), 0.0);
        match self.chi {
            None => base,
            Some(c) => {
                let rule = QuadRule { panels: 64, order: 8 };
                let part: Complex64 = rule
                    .nodes(-c.outer, c.outer)
                    .into_iter()
                    .map(|(k0, w)| {
                        let chi = c.amp * plateau_value(k0, c.inner, c.outer) * u;
                        Complex64::from_polar(w * chi, -k0 * t) / Complex64::new(-e, k0)
                    })
                    .sum();
                base - part / (2.0 * PI)
            }
        }
    }

    /// Quadrature evaluation of `∫ dk₀/2π e^{-ik₀t} U/(ik₀ - e)`, independent
    /// of the closed form: numerical integral on `|k₀| ≤ 50 E` plus the first
    /// four terms of the large-`k₀` expansion integrated analytically.
    pub fn c_time_quadrature(&self, t: f64, k: &[f64]) -> Result<(f64, f64)> {
        let u = self.u(k);
        let e = self.e_eff(k);
        let (v1, v2) = (time_integral(e, t, self.big_e(), 1), time_integral(e, t, self.big_e(), 2));
        let err = (v1 - v2).abs();
        if err > 1e-8 {
            return Err(Error::Numeric(format!(
                "k0 quadrature not converged at t={t}, e={e}: refinement changed the value by {err:e}"
            )));
        }
        Ok((u * v2, u * err))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "d": self.d,
            "dispersion": self.dispersion.to_json(),
            "cutoff": match self.cutoff {
                Cutoff::Unit => json!({"type": "unit"}),
                Cutoff::Bump { inner, outer } => json!({"type": "bump", "inner": inner, "outer": outer}),
            },
            "chi": self.chi.map(|c| json!({"amp": c.amp, "inner": c.inner, "outer": c.outer})),
            "counterterm": self.counterterm.map(|c| json!({"c0": c.c0, "c1": c.c1})),
            "mu": self.mu,
            "r": self.r,
            "r0": self.r0,
        })
    }
}

/// `∫ dk₀/2π e^{-ik₀t}/(ik₀ - e)`; `t = 0` is the limit from below.
pub fn time_kernel(e: f64, t: f64) -> f64 {
    if t > 0.0 {
        if e > 0.0 {
            -(-e * t).exp()
        } else {
            0.0
        }
    } else if e < 0.0 {
        (-e * t).exp()
    } else {
        0.0
    }
}

fn sin_tail(k: f64, t: f64) -> f64 {
    // ∫_K^∞ sin(kt)/k dk
    if t == 0.0 {
        0.0
    } else {
        t.signum() * quad::sine_integral_tail(k * t.abs())
    }
}

fn time_integral(e: f64, t: f64, big_e: f64, refine: usize) -> f64 {
    let kc = 50.0 * big_e;
    let periods = kc * t.abs() / (2.0 * PI);
    let panels = (64 + (8.0 * periods) as usize + (4.0 * kc / e.abs().max(1e-3)) as usize) * refine;
    let rule = QuadRule { panels, order: 8 };
    // real part of the integrand; the imaginary part is odd in k₀
    let core = 2.0 * rule.integrate(0.0, kc, |k0| (-e * (k0 * t).cos() - k0 * (k0 * t).sin()) / (k0 * k0 + e * e));
    let s1 = sin_tail(kc, t);
    let c2 = (kc * t).cos() / kc - t * s1;
    let s3 = (kc * t).sin() / (2.0 * kc * kc) + 0.5 * t * c2;
    let c4 = (kc * t).cos() / (3.0 * kc.powi(3)) - t * s3 / 3.0;
    let tail = -2.0 * s1 - 2.0 * e * c2 + 2.0 * e * e * s3 + 2.0 * e.powi(3) * c4;
    let v = (core + tail) / (2.0 * PI);
    // the symmetric integral at t = 0 is the midpoint of the unit jump
    if t == 0.0 {
        v + 0.5
    } else {
        v
    }
}

#[cfg(test)]
mod tests;
