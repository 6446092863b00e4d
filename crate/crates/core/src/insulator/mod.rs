//! Desk-scale perturbative study of a gapped many-fermion model: interaction
//! kernel, scalar inputs, amputated Green's functions and their deviations
//! from the first-order terms.

mod greens;

use std::sync::Arc;

use num_complex::Complex64;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::lattice::Lattice;
use crate::norm::MultiIndex;
use crate::propagator::PropagatorSpec;

pub use greens::{
    extract_green, greens, greens_exact, reassemble, scaling_study, GreensSet, ScalingFit, EXACT_CIRCLE_POINTS,
    EXACT_CIRCLE_RADIUS, MAX_LAMBDA_ORDER,
};

/// Spatial two-body potential `v(x⃗)`, even in `x⃗`.
#[derive(Clone, Debug, PartialEq)]
pub enum Potential {
    /// `v(0) = u`, zero elsewhere.
    OnSite { u: f64 },
    /// `amp · exp(-|x⃗| / range)`.
    Exponential { amp: f64, range: f64 },
    /// `amp · exp(-|x⃗| / range) / (1 + |x⃗|)`.
    Yukawa { amp: f64, range: f64 },
}

impl Potential {
    pub fn eval(&self, x: &[f64]) -> f64 {
        let r = x.iter().map(|a| a * a).sum::<f64>().sqrt();
        match *self {
            Potential::OnSite { u } => {
                if r == 0.0 {
                    u
                } else {
                    0.0
                }
            }
            Potential::Exponential { amp, range } => amp * (-r / range).exp(),
            Potential::Yukawa { amp, range } => amp * (-r / range).exp() / (1.0 + r),
        }
    }

    pub fn to_json(&self) -> Value {
        match *self {
            Potential::OnSite { u } => json!({"type": "onsite", "u": u}),
            Potential::Exponential { amp, range } => json!({"type": "exponential", "amp": amp, "range": range}),
            Potential::Yukawa { amp, range } => json!({"type": "yukawa", "amp": amp, "range": range}),
        }
    }
}

/// Density-density interaction kernel on slots `(x₁, y₁, x₂, y₂)` with
/// conjugation indices `(1, 0, 1, 0)`, antisymmetrized in `x₁, x₂` and in
/// `y₁, y₂` separately.
pub fn v0_from_potential(v: &Potential, lattice: &Arc<Lattice>) -> Result<Kernel> {
    let mut raw = Kernel::new(lattice.clone(), 0, 4)?;
    let cell = lattice.cell_volume();
    let norm = -0.5 / (cell * cell * lattice.dt);
    let sites = lattice.sites();
    for t in 0..lattice.t {
        for s1 in 0..sites {
            for s2 in 0..sites {
                let (a, b) = (t * sites + s1, t * sites + s2);
                let disp: Vec<f64> = (1..=lattice.d)
                    .map(|axis| lattice.diff(lattice.with_spin_conj(a, 0, 0), lattice.with_spin_conj(b, 0, 0), axis))
                    .collect();
                let val = v.eval(&disp) * norm;
                if val == 0.0 {
                    continue;
                }
                for sp1 in 0..2 {
                    for sp2 in 0..2 {
                        let pts = [
                            lattice.with_spin_conj(a, sp1, 1),
                            lattice.with_spin_conj(a, sp1, 0),
                            lattice.with_spin_conj(b, sp2, 1),
                            lattice.with_spin_conj(b, sp2, 0),
                        ];
                        raw.add_at(&pts, Complex64::new(val, 0.0))?;
                    }
                }
            }
        }
    }
    pair_antisymmetrize(&raw)
}

/// `¼ Σ sgn(σ) sgn(τ) f(x_σ, y_τ)` over the two pairs of a four-slot kernel.
pub fn pair_antisymmetrize(f: &Kernel) -> Result<Kernel> {
    if f.m() != 0 || f.n() != 4 {
        return Err(Error::usage("pair antisymmetrization needs a four-slot kernel"));
    }
    let mut out = Kernel::new(f.lattice().clone(), 0, 4)?;
    for (k, v) in f.entries() {
        let p = crate::kernel::unpack(k, 4);
        let q = 0.25 * v;
        out.add_at(&[p[0], p[1], p[2], p[3]], q)?;
        out.add_at(&[p[2], p[1], p[0], p[3]], -q)?;
        out.add_at(&[p[0], p[3], p[2], p[1]], -q)?;
        out.add_at(&[p[2], p[3], p[0], p[1]], q)?;
    }
    Ok(out.pruned(0.0))
}

/// Largest deviation from antisymmetry under `x₁ ↔ x₂` and `y₁ ↔ y₂`.
pub fn pair_antisymmetry_defect(f: &Kernel) -> f64 {
    let mut worst: f64 = 0.0;
    for (k, v) in f.entries() {
        let p = crate::kernel::unpack(k, 4);
        worst = worst.max((v + f.get(&[p[2], p[1], p[0], p[3]])).norm());
        worst = worst.max((v + f.get(&[p[0], p[3], p[2], p[1]])).norm());
    }
    worst
}

/// `(g, γ, E)` with `g = ∫_{supp U} d^dk / |e|`.
pub fn g_gamma_e(spec: &PropagatorSpec) -> (f64, f64, f64) {
    (spec.g1_g2().0, spec.gamma(), spec.big_e())
}

#[derive(Clone, Debug, PartialEq)]
pub struct Upsilon {
    pub value: f64,
    /// Multiindex attaining the sup.
    pub argmax: MultiIndex,
    /// Whether some admissible `δ` was skipped by the enumeration cap.
    pub capped: bool,
}

/// `sup_D μ^{|δ(D)|} |||D V₀|||_{1,∞}` over canonical decay operators with
/// `δ₀ ≤ r0`, `|δ⃗| ≤ r` and `|δ| ≤ delta_max`.
pub fn upsilon(v0: &Kernel, mu: f64, r: u32, r0: u32, delta_max: u32) -> Upsilon {
    let d = v0.lattice().d;
    let domain = crate::norm::SaturatedSet::boxed(d, r0, r);
    let mut best = Upsilon { value: 0.0, argmax: MultiIndex::zero(d), capped: false };
    for delta in domain.members() {
        if delta.len_total() > delta_max {
            best.capped = true;
            continue;
        }
        let v = mu.powi(delta.len_total() as i32) * v0.max_decay_norm(delta);
        if v > best.value {
            best.value = v;
            best.argmax = delta.clone();
        }
    }
    best
}

#[derive(Clone, Debug, PartialEq)]
pub struct Smallness {
    pub threshold: f64,
    pub v0_norm: f64,
    pub upsilon: f64,
    pub g: f64,
    pub gamma: f64,
    pub mu: f64,
    pub epsilon: f64,
    pub part_i: bool,
    pub part_ii: bool,
}

/// The two smallness hypotheses `|||V₀||| ≤ εμ^d/(gγ²)` and `υ ≤ εμ^d/(gγ²)`.
#[allow(clippy::too_many_arguments)]
pub fn smallness_check(v0_norm: f64, upsilon: f64, g: f64, gamma: f64, mu: f64, d: usize, epsilon: f64) -> Smallness {
    let threshold = epsilon * mu.powi(d as i32) / (g * gamma * gamma);
    Smallness {
        threshold,
        v0_norm,
        upsilon,
        g,
        gamma,
        mu,
        epsilon,
        part_i: v0_norm <= threshold,
        part_ii: upsilon <= threshold,
    }
}

/// `K(x, y) = 4 ∫ dx' dy' V₀(x, y, x', y') C(x', y')`, with `C` the full
/// two-point kernel on the base space evaluated at the conjugation indices of
/// the `x', y'` slots.
pub fn k_kernel(v0: &Kernel, c: &Kernel) -> Result<Kernel> {
    if v0.m() != 0 || v0.n() != 4 {
        return Err(Error::usage("K needs a four-slot interaction kernel"));
    }
    Ok(v0.integrate_pair(c, 2, 3)?.scale(Complex64::new(4.0, 0.0)))
}

#[derive(Clone, Debug)]
pub struct DeviationRow {
    pub channel: &'static str,
    pub delta: MultiIndex,
    pub value: f64,
    /// `g γ^p υ² / μ^{d+|δ|}` with the channel's power `p`.
    pub shape: f64,
    pub measured_constant: f64,
}

/// `|||D(G₂ - K)|||`, `|||D(G₄ - V₀)|||`, `|||D G₆|||` per multiindex, next to
/// the corresponding bound shapes.
#[allow(clippy::too_many_arguments)]
pub fn deviation_norms(
    g2: &Kernel,
    g4: &Kernel,
    g6: &Kernel,
    k: &Kernel,
    v0: &Kernel,
    deltas: &[MultiIndex],
    scalars: (f64, f64, f64, f64),
) -> Result<Vec<DeviationRow>> {
    let (g, gamma, ups, mu) = scalars;
    let d = v0.lattice().d as i32;
    let dev2 = g2.sub(k)?;
    let dev4 = g4.sub(v0)?;
    let channels: [(&'static str, &Kernel, i32); 3] = [("G2-K", &dev2, 4), ("G4-V0", &dev4, 2), ("G6", g6, 0)];
    let mut rows = Vec::new();
    for (name, x, p) in channels {
        for delta in deltas {
            let value = x.max_decay_norm(delta);
            let shape = g * gamma.powi(p) * ups * ups / mu.powi(d + delta.len_total() as i32);
            let measured_constant = if shape > 0.0 { value / shape } else { f64::INFINITY };
            rows.push(DeviationRow { channel: name, delta: delta.clone(), value, shape, measured_constant });
        }
    }
    Ok(rows)
}
