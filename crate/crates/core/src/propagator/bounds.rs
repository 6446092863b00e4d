use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use super::position::dual_grid;
use super::{Chi, Counterterm, Cutoff, Jet, PropagatorSpec, QuadRule};
use crate::error::{Error, Result};
use crate::kernel::SeminormOptions;
use crate::lattice::Lattice;
use crate::norm::{frak_c, frak_e, MultiIndex, NormElement, SaturatedSet};

/// Spatial measure `d^dk/(2π)^d`: quadrature over the support of `U`, or the
/// normalized sum over the dual grid of a lattice.
#[derive(Clone, Debug)]
pub enum Measure {
    Continuum,
    Lattice(Arc<Lattice>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormMode {
    Sup,
    Integral,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    Gapped,
    Cutoff,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GramReport {
    /// `√∫ d^{d+1}k/(2π)^{d+1} |C(k)|`, `+inf` when the `k₀` integral diverges.
    pub value: f64,
    /// `√∫ d^dk/(2π)^d U` for constant dispersions without `χ`.
    pub constant_band: Option<f64>,
    pub error: f64,
}

#[derive(Clone, Debug)]
pub struct SBound {
    /// Right side bounding `S(C)²`.
    pub total: f64,
    pub u_term: f64,
    pub chi_term: f64,
    pub slab_term: f64,
    pub e: f64,
}

#[derive(Clone, Debug)]
pub struct CountertermSeries {
    pub ratio: f64,
    /// Largest pointwise gap between partial sum and direct evaluation.
    pub max_series_error: f64,
    pub bound: NormElement,
    pub majorant: NormElement,
    pub delta_e_norm: NormElement,
}

const DIVERGENCE_PROBE: f64 = 1e6;

impl PropagatorSpec {
    /// Spatial nodes with weights including `1/(2π)^d`.
    pub fn spatial_nodes(&self, measure: &Measure) -> Vec<(Vec<f64>, f64)> {
        match measure {
            Measure::Continuum => {
                let (lo, hi) = self.support_box();
                let norm = (2.0 * PI).powi(self.d as i32);
                self.quad.box_nodes(&lo, &hi).into_iter().map(|(k, w)| (k, w / norm)).collect()
            }
            Measure::Lattice(lat) => {
                let w = 1.0 / lat.spatial_volume();
                dual_grid(lat).into_iter().map(|k| (k, w)).collect()
            }
        }
    }

    fn k0_scale(&self) -> f64 {
        self.big_e()
    }

    fn u_identically_zero(&self) -> bool {
        self.spatial_nodes(&Measure::Continuum).iter().all(|(k, _)| self.u(k) == 0.0)
    }

    /// `∫ d^{d+1}k/(2π)^{d+1} |D^δ C(k)|` for every `δ ∈ set`; `+inf` where the
    /// `k₀` integral diverges or the derivative is outside the budget.
    pub fn derivative_integrals(&self, set: &Arc<SaturatedSet>) -> NormElement {
        let members = set.members().to_vec();
        let mut acc = vec![0.0f64; members.len()];
        let mut divergent = vec![false; members.len()];
        let nodes = self.spatial_nodes(&Measure::Continuum);
        let unit = matches!(self.cutoff, Cutoff::Unit);
        for (i, delta) in members.iter().enumerate() {
            if delta.temporal() > self.r0 || delta.len_spatial() > self.r || (unit && delta.len_spatial() > 0) {
                divergent[i] = true;
            }
        }
        // the k₀ integrand decays like |k₀|^{-1-δ₀}; δ₀ = 0 converges only if D^δ⃗ C vanishes
        for (k, _) in &nodes {
            let mut pt = vec![DIVERGENCE_PROBE * self.k0_scale()];
            pt.extend_from_slice(k);
            let jet = self.c_jet(&pt, set);
            for (i, delta) in members.iter().enumerate() {
                if delta.temporal() == 0 && jet.derivative(delta).norm() * pt[0] > 1e-9 {
                    divergent[i] = true;
                }
            }
        }
        let line = QuadRule { panels: self.quad.panels, order: self.quad.order };
        let th_nodes = line.nodes(-PI / 2.0, PI / 2.0);
        let s = self.k0_scale();
        for (k, wk) in &nodes {
            if self.u(k) == 0.0 {
                continue;
            }
            for &(th, wt) in &th_nodes {
                let c = th.cos();
                let k0 = s * th.tan();
                let w = wk * wt * s / (c * c) / (2.0 * PI);
                let mut pt = vec![k0];
                pt.extend_from_slice(k);
                let jet = self.c_jet(&pt, set);
                for (i, delta) in members.iter().enumerate() {
                    if !divergent[i] {
                        acc[i] += w * jet.derivative(delta).norm();
                    }
                }
            }
        }
        let coeffs = acc
            .into_iter()
            .zip(divergent)
            .map(|(v, div)| if div { f64::INFINITY } else { v })
            .collect();
        NormElement::from_coeffs(set.clone(), coeffs).expect("one coefficient per member")
    }

    /// `‖C(k)‖̌₁` on `set`: derivative integrals divided by `δ!`.
    pub fn momentum_norm_1(&self, set: &Arc<SaturatedSet>) -> NormElement {
        let raw = self.derivative_integrals(set);
        NormElement::from_fn(set.clone(), |delta| raw.get(delta) / delta.factorial())
    }

    /// Gram bound on `S(C)` from the momentum integral of `|C|`.
    pub fn gram_bound(&self) -> GramReport {
        let constant_band = match (&self.dispersion, self.chi, self.counterterm) {
            (super::Dispersion::Constant { .. }, None, None) => {
                let a: f64 = self.spatial_nodes(&Measure::Continuum).iter().map(|(k, w)| w * self.u(k)).sum();
                Some(a.sqrt())
            }
            _ => None,
        };
        let value = if self.u_identically_zero() { 0.0 } else { f64::INFINITY };
        GramReport { value, constant_band, error: 0.0 }
    }

    /// `max_s √∫ |C χ_s²|` for a family of momentum-space weights.
    pub fn gram_bound_partitioned(&self, parts: &[&dyn Fn(f64, &[f64]) -> f64], measure: &Measure) -> GramReport {
        let nodes = self.spatial_nodes(measure);
        let s = self.k0_scale();
        let mut best: f64 = 0.0;
        let mut err: f64 = 0.0;
        for chi_s in parts {
            let probe = DIVERGENCE_PROBE * s;
            let divergent = nodes.iter().any(|(k, _)| {
                self.u(k) > 0.0 && (chi_s(probe, k) != 0.0 || chi_s(-probe, k) != 0.0)
            });
            if divergent {
                return GramReport { value: f64::INFINITY, constant_band: None, error: 0.0 };
            }
            let integral = |rule: QuadRule| -> f64 {
                nodes
                    .iter()
                    .map(|(k, w)| {
                        if self.u(k) == 0.0 {
                            return 0.0;
                        }
                        w * rule.integrate_line(s, |k0| (self.c_k(k0, k) * chi_s(k0, k).powi(2)).norm()) / (2.0 * PI)
                    })
                    .sum()
            };
            let rule = QuadRule { panels: 4 * self.quad.panels, order: self.quad.order };
            let v = integral(rule);
            let v2 = integral(rule.refined());
            err = err.max((v2.sqrt() - v.sqrt()).abs());
            best = best.max(v2.sqrt());
        }
        GramReport { value: best, constant_band: None, error: err }
    }

    /// Three-term bound on `S(C)²` for `(U - χ)/(ik₀ - e)`.
    pub fn s_bound_gapped(&self, measure: &Measure) -> Result<SBound> {
        if self.counterterm.is_some() {
            return Err(Error::usage("S(C) bound applies to the counterterm-free form"));
        }
        let nodes = self.spatial_nodes(measure);
        let mut e_sup = self.e_sup();
        for (k, _) in &nodes {
            if self.u(k) > 0.0 {
                e_sup = e_sup.max(self.dispersion.eval(k).abs());
            }
        }
        if e_sup == 0.0 || self.u_identically_zero() {
            return Ok(SBound { total: 0.0, u_term: 0.0, chi_term: 0.0, slab_term: 0.0, e: e_sup });
        }
        let rule = QuadRule { panels: 32, order: 8 };
        let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
        for (k, w) in &nodes {
            let u = self.u(k);
            if u == 0.0 {
                continue;
            }
            let e = self.dispersion.eval(k);
            a += w * u;
            if let Some(Chi { amp, inner, outer }) = self.chi {
                b += w * amp * u * rule.integrate(-outer, outer, |k0| super::plateau_value(k0, inner, outer)) / (2.0 * PI);
            }
            c += w * rule.integrate(-e_sup, e_sup, |k0| (u - self.chi_value(k0, k)) / (k0 * k0 + e * e).sqrt())
                / (2.0 * PI);
        }
        Ok(SBound { total: 9.0 * a + 3.0 / e_sup * b + 6.0 * c, u_term: a, chi_term: b, slab_term: c, e: e_sup })
    }

    /// `(g₁, g₂)`: `∫_{supp U} d^dk / |e|` and `∫_{supp U} d^dk μ/|e|²`.
    pub fn g1_g2(&self) -> (f64, f64) {
        let (lo, hi) = self.support_box();
        let supp = |k: &[f64]| self.u(k) > 0.0;
        let mut g1 = 0.0;
        let mut g2 = 0.0;
        for (k, w) in self.quad.box_nodes(&lo, &hi) {
            if !supp(&k) {
                continue;
            }
            let e = self.dispersion.eval(&k).abs();
            g1 += w / e;
            g2 += w * self.mu / (e * e);
        }
        (g1, g2)
    }

    /// `γ = max{1, √∫ d^dk U log(E/|e|)}`.
    pub fn gamma(&self) -> f64 {
        let (lo, hi) = self.support_box();
        let big_e = self.big_e();
        let s: f64 = self
            .quad
            .box_nodes(&lo, &hi)
            .into_iter()
            .map(|(k, w)| {
                let u = self.u(&k);
                if u == 0.0 {
                    0.0
                } else {
                    w * u * (big_e / self.dispersion.eval(&k).abs()).ln()
                }
            })
            .sum();
        s.max(0.0).sqrt().max(1.0)
    }

    /// Contraction-constant element with the unspecified constant set to 1.
    pub fn contraction_element(&self, domain: &Arc<SaturatedSet>, variant: Variant) -> NormElement {
        let (r, r0, d) = (self.r as i64, self.r0 as i64, self.d as i64);
        match variant {
            Variant::Gapped => {
                let (g1, _) = self.g1_g2();
                let pre = g1 / self.mu.powi(self.d as i32);
                NormElement::from_fn(domain.clone(), |delta| {
                    if delta.len_spatial() as i64 <= r - d - 1 {
                        pre * (2.0 / self.mu).powi(delta.len_total() as i32)
                    } else if delta.is_zero() {
                        pre
                    } else {
                        f64::INFINITY
                    }
                })
            }
            Variant::Cutoff => NormElement::from_fn(domain.clone(), |delta| {
                if delta.len_spatial() as i64 <= r - d - 1 && delta.temporal() as i64 <= r0 - 2 {
                    1.0
                } else if delta.is_zero() {
                    1.0
                } else {
                    f64::INFINITY
                }
            }),
        }
    }

    /// Enlarged cutoff equal to 1 on the support of `U`, without `χ`.
    fn enlarged(&self) -> PropagatorSpec {
        let mut s = self.clone();
        s.chi = None;
        s.counterterm = None;
        let zone = self.zone().iter().cloned().fold(f64::INFINITY, f64::min);
        s.cutoff = match self.cutoff {
            Cutoff::Bump { outer, .. } if outer * 1.25 < zone => Cutoff::Bump { inner: outer, outer: outer * 1.25 },
            _ => Cutoff::Unit,
        };
        s
    }

    /// `C̃₀(k) = Ũ/(ik₀ - e)` at a point of the support of `U - χ`.
    fn c_tilde(&self, k0: f64, k: &[f64]) -> Complex64 {
        self.enlarged().c_k(k0, k)
    }

    fn c_zero(&self) -> PropagatorSpec {
        let mut s = self.clone();
        s.counterterm = None;
        s
    }

    /// Geometric expansion of `C` in the counterterm, checked pointwise on the
    /// dual grid of `lattice` and assembled into norm bounds there.
    pub fn counterterm_series(&self, lattice: &Arc<Lattice>, n_max: usize) -> Result<CountertermSeries> {
        let domain = Arc::new(SaturatedSet::boxed(self.d, self.r0, self.r));
        let c0 = self.c_zero();
        let grid = dual_grid(lattice);
        let k0_nodes = QuadRule { panels: 16, order: 8 }.nodes(-4.0 * self.big_e(), 4.0 * self.big_e());
        let mut ratio: f64 = 0.0;
        for k in &grid {
            if self.u(k) == 0.0 {
                continue;
            }
            let de = self.delta_e(k);
            // |δe C̃₀| is largest at k₀ = 0
            ratio = ratio.max((de * self.c_tilde(0.0, k)).norm());
        }
        if !(ratio < 1.0) {
            return Err(Error::Numeric(format!("counterterm series ratio sup|δe C̃₀| = {ratio} is not below 1")));
        }
        let mut max_err: f64 = 0.0;
        for k in &grid {
            for &(k0, _) in &k0_nodes {
                let direct = self.c_k(k0, k);
                let q = -self.delta_e(k) * self.c_tilde(k0, k);
                let mut term = c0.c_k(k0, k);
                let mut sum = Complex64::default();
                for _ in 0..=n_max {
                    sum += term;
                    term *= q;
                }
                max_err = max_err.max((sum - direct).norm());
            }
        }
        let opts = SeminormOptions::default();
        let de_norm = self.delta_e_hat(lattice)?.seminorm_1inf(&domain, opts);
        let c0_norm = c0.c_position(lattice)?.seminorm_1inf(&domain, opts);
        let ct_norm = self.enlarged().c_position(lattice)?.seminorm_1inf(&domain, opts);
        let x = de_norm.mul(&ct_norm)?;
        let bound = if x.constant_term() < 1.0 {
            c0_norm.mul(&x.geom_inverse(1.0)?)?
        } else {
            NormElement::infinite(domain.clone())
        };
        let frak_c0 = frak_c(self.r, self.r0, 1.0, 1.0, self.d);
        let de_boxed = NormElement::from_fn(frak_c0.domain().clone(), |delta| de_norm.get(delta));
        let majorant = frak_e(&de_boxed, 1.0, &frak_c0).unwrap_or_else(|_| NormElement::infinite(frak_c0.domain().clone()));
        Ok(CountertermSeries { ratio, max_series_error: max_err, bound, majorant, delta_e_norm: de_norm })
    }

    /// `d/ds C_s` at `s = 0` for the perturbation `δe → δe + s δe'`, in closed
    /// form and by central differences.
    pub fn counterterm_derivative(&self, de_prime: &Counterterm, k0: f64, k: &[f64], h: f64) -> (Complex64, Complex64) {
        let c = self.c_k(k0, k);
        let num = self.u(k) - self.chi_value(k0, k);
        let ct_tilde = if num == 0.0 { Complex64::default() } else { 1.0 / Complex64::new(-self.e_eff(k), k0) };
        let analytic = -c * ct_tilde * de_prime.eval(k);
        let shifted = |s: f64| {
            let mut sp = self.clone();
            let base = self.counterterm.unwrap_or(Counterterm { c0: 0.0, c1: 0.0 });
            sp.counterterm = Some(Counterterm { c0: base.c0 + s * de_prime.c0, c1: base.c1 + s * de_prime.c1 });
            sp.c_k(k0, k)
        };
        (analytic, (shifted(h) - shifted(-h)) / (2.0 * h))
    }
}

/// Derivative-weighted norms of a jet-valued function over a box `[lo, hi]` in
/// `ℝ × ℝ^d`, with `(r₀, r)` budget.
pub fn check_norms(
    f: &dyn Fn(&[Jet]) -> Jet,
    domain: &Arc<SaturatedSet>,
    mode: NormMode,
    region: (&[f64], &[f64]),
    budget: Option<(u32, u32)>,
    rule: QuadRule,
) -> Result<NormElement> {
    if let Some((r0, r)) = budget {
        if let Some(bad) = domain.members().iter().find(|m| m.temporal() > r0 || m.len_spatial() > r) {
            return Err(Error::domain(format!("derivative order {bad} exceeds the budget (r0={r0}, r={r})")));
        }
    }
    let (lo, hi) = region;
    if lo.len() != domain.dim() + 1 || hi.len() != domain.dim() + 1 {
        return Err(Error::usage("region dimension does not match the domain"));
    }
    let norm = (2.0 * PI).powi(domain.dim() as i32 + 1);
    let members = domain.members();
    let mut acc = vec![0.0f64; members.len()];
    for (p, w) in rule.box_nodes(lo, hi) {
        let vars = Jet::variables(domain, &p);
        let jet = f(&vars);
        for (i, delta) in members.iter().enumerate() {
            let v = jet.derivative(delta).norm();
            match mode {
                NormMode::Sup => acc[i] = acc[i].max(v),
                NormMode::Integral => acc[i] += w * v / norm,
            }
        }
    }
    let coeffs = members.iter().zip(acc).map(|(delta, v)| v / delta.factorial()).collect();
    NormElement::from_coeffs(domain.clone(), coeffs)
}

/// Coefficientwise ratio `lhs / rhs`, `None` where `rhs` is infinite or zero.
pub fn measured_ratio(lhs: &NormElement, rhs: &NormElement) -> Vec<(MultiIndex, Option<f64>)> {
    lhs.iter()
        .map(|(delta, a)| {
            let b = rhs.get(delta);
            let r = if b.is_finite() && b > 0.0 && a.is_finite() { Some(a / b) } else { None };
            (delta.clone(), r)
        })
        .collect()
}
