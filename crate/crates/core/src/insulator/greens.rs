use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grassmann::{
    gr_from_kernel, gr_from_kernel_in, omega, omega_with_log_cap, CovarianceMatrix, ExactElement, GeneratorSet,
    Grassmann, LamPoly,
};
use crate::kernel::Kernel;
use crate::lattice::Lattice;
use crate::perm::{factorial, signed_permutations};

/// Points on `|λ| = ρ` used to recover Taylor coefficients from the exact backend.
pub const EXACT_CIRCLE_POINTS: usize = 16;
pub const EXACT_CIRCLE_RADIUS: f64 = 0.05;

/// Largest λ-order the truncated backend supports; the fourth power of a
/// quartic interaction would exceed the degree cap.
pub const MAX_LAMBDA_ORDER: usize = 2;
const DEGREE_CAP: u32 = 8;
const LOG_CAP: u32 = 6;

/// Amputated Green's functions per λ-order.
///
/// `G₂ₙ(x₁, y₁, …, xₙ, yₙ)` has slot conjugation indices `(1, 0, …, 1, 0)` and
/// is normalized so that the generating functional is
/// `Σₙ ∫ G₂ₙ ψ̄(x₁)ψ(y₁)⋯ψ̄(xₙ)ψ(yₙ)`; the `1/(n!)²`-weighted coefficients are
/// `(n!)² G₂ₙ`.
#[derive(Clone, Debug)]
pub struct GreensSet {
    pub lattice: Arc<Lattice>,
    pub n_max: usize,
    /// `orders[k][n - 1]` is the `λ^k` coefficient of `G₂ₙ`, `n = 1, 2, 3`.
    pub orders: Vec<Vec<Kernel>>,
    /// Largest coefficient on monomials with unequal numbers of `ψ̄` and `ψ`.
    pub charge_violation: f64,
    /// `λ^k` coefficients of the generating functional itself.
    pub functional: Vec<ExactElement>,
}

impl GreensSet {
    pub fn coefficient(&self, order: usize, n: usize) -> &Kernel {
        &self.orders[order][n - 1]
    }

    /// `Σ_k λ^k G₂ₙ^{(k)}`.
    pub fn at(&self, lam: f64, n: usize) -> Result<Kernel> {
        let mut acc = Kernel::new(self.lattice.clone(), 0, 2 * n)?;
        for (k, row) in self.orders.iter().enumerate() {
            acc = acc.add(&row[n - 1].scale(Complex64::new(lam.powi(k as i32), 0.0)))?;
        }
        Ok(acc)
    }
}

/// The `2n`-point kernel carried by the degree-`2n` part of a generating
/// functional, and the largest coefficient on charge-violating monomials.
pub fn extract_green(e: &ExactElement, gens: &GeneratorSet, n: usize) -> Result<(Kernel, f64)> {
    let lat = gens.lattice().clone();
    let w = lat.cell_volume().powi(2 * n as i32);
    let norm = w * factorial(n) * factorial(n);
    let perms = signed_permutations(n);
    let mut out = Kernel::new(lat.clone(), 0, 2 * n)?;
    let mut violation: f64 = 0.0;
    let mut word = vec![0usize; 2 * n];
    let mut pts = vec![0usize; 2 * n];
    for (bits, c) in e.terms() {
        if bits.count_ones() as usize != 2 * n {
            continue;
        }
        let gs: Vec<usize> = (0..64).filter(|i| bits >> i & 1 == 1).collect();
        let xs: Vec<usize> = gs.iter().copied().filter(|&g| lat.conj_of(gens.point_of(g)) == 1).collect();
        let ys: Vec<usize> = gs.iter().copied().filter(|&g| lat.conj_of(gens.point_of(g)) == 0).collect();
        if xs.len() != n {
            violation = violation.max(c.norm());
            continue;
        }
        for i in 0..n {
            word[2 * i] = xs[i];
            word[2 * i + 1] = ys[i];
        }
        let (_, s) = e.ordered_bits(&word)?.expect("distinct generators");
        let base = c * s / norm;
        for (sigma, ss) in &perms {
            for (tau, st) in &perms {
                for i in 0..n {
                    pts[2 * i] = gens.point_of(xs[sigma[i]]);
                    pts[2 * i + 1] = gens.point_of(ys[tau[i]]);
                }
                out.add_at(&pts, base * (ss * st))?;
            }
        }
    }
    Ok((out, violation))
}

/// `Σₙ ∫ G₂ₙ ψ̄ψ⋯ψ̄ψ` for one λ-order: the inverse of the extraction.
pub fn reassemble(set: &GreensSet, order: usize, gens: &GeneratorSet) -> Result<ExactElement> {
    let mut acc: Grassmann<LamPoly<1>> = gens.zero()?;
    for k in &set.orders[order] {
        let part = gr_from_kernel_in(k, gens, |c| LamPoly::<1>([c]))?;
        acc = acc.add(&part)?;
    }
    acc.order(0)
}

fn assemble(gens: &GeneratorSet, functional: Vec<ExactElement>, n_max: usize) -> Result<GreensSet> {
    let mut orders = Vec::with_capacity(n_max + 1);
    let mut violation: f64 = 0.0;
    for f in &functional {
        let mut row = Vec::with_capacity(3);
        for n in 1..=3 {
            let (k, v) = extract_green(f, gens, n)?;
            violation = violation.max(v);
            row.push(k);
        }
        orders.push(row);
    }
    Ok(GreensSet { lattice: gens.lattice().clone(), n_max, orders, charge_violation: violation, functional })
}

fn generator_setup(v0: &Kernel, c: &Kernel) -> Result<(GeneratorSet, CovarianceMatrix)> {
    if v0.m() != 0 || v0.n() != 4 || c.m() != 0 || c.n() != 2 {
        return Err(Error::usage("Green's functions need a four-slot interaction and a two-point covariance"));
    }
    let gens = GeneratorSet::all_internal(v0.lattice().clone())?;
    let cov = gens.covariance(c)?;
    Ok((gens, cov))
}

/// Green's functions through λ-order `n_max ≤ 2` from `Ω_C(λ Gr(V₀))`, with
/// every base point of the lattice as a generator and coefficients in the
/// truncated ring of polynomials in `λ`.
pub fn greens(v0: &Kernel, c: &Kernel, n_max: usize) -> Result<GreensSet> {
    if n_max == 0 {
        return Err(Error::usage("λ-order cap must be at least 1"));
    }
    if n_max > MAX_LAMBDA_ORDER {
        return Err(Error::Capacity(format!(
            "the truncated backend supports λ-orders up to {MAX_LAMBDA_ORDER}, got {n_max}"
        )));
    }
    let (gens, cov) = generator_setup(v0, c)?;
    let v = gr_from_kernel_in(v0, &gens, |c| LamPoly::<3>::monomial(1, c))?.with_degree_cap(Some(DEGREE_CAP));
    let om = omega_with_log_cap(&v, &cov, Some(LOG_CAP))?;
    let functional = (0..=n_max).map(|k| om.order(k)).collect::<Result<Vec<_>>>()?;
    assemble(&gens, functional, n_max)
}

/// Green's functions from exact evaluations of `Ω_C(λ Gr(V₀))` on a circle of
/// complex couplings, Taylor coefficients by discrete Fourier transform.
/// Needs at most 22 base points.
pub fn greens_exact(v0: &Kernel, c: &Kernel, n_max: usize) -> Result<GreensSet> {
    let (gens, cov) = generator_setup(v0, c)?;
    let v = gr_from_kernel(v0, &gens)?;
    let m = EXACT_CIRCLE_POINTS;
    let mut coeffs: Vec<ExactElement> = vec![gens.zero()?; n_max + 1];
    for j in 0..m {
        let lam = Complex64::from_polar(EXACT_CIRCLE_RADIUS, 2.0 * PI * j as f64 / m as f64);
        let om = omega(&v.scale(lam), &cov)?;
        for (k, acc) in coeffs.iter_mut().enumerate() {
            let w = lam.powi(-(k as i32)) / m as f64;
            *acc = acc.add(&om.scale(w))?;
        }
    }
    assemble(&gens, coeffs, n_max)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingFit {
    pub channel: &'static str,
    pub slope: f64,
    pub norms: Vec<f64>,
}

/// Least-squares slopes of `log |||deviation|||₁,∞` against `log λ` for the
/// three channels, where `k1` and `v1` are the first-order terms per unit λ.
pub fn scaling_study(set: &GreensSet, k1: &Kernel, v1: &Kernel, lams: &[f64]) -> Result<Vec<ScalingFit>> {
    if lams.len() < 2 || lams.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::Numeric("degenerate fit: need at least two positive couplings".into()));
    }
    let mut norms = [Vec::new(), Vec::new(), Vec::new()];
    for &lam in lams {
        let l = Complex64::new(lam, 0.0);
        norms[0].push(set.at(lam, 1)?.sub(&k1.scale(l))?.norm_1inf_scalar());
        norms[1].push(set.at(lam, 2)?.sub(&v1.scale(l))?.norm_1inf_scalar());
        norms[2].push(set.at(lam, 3)?.norm_1inf_scalar());
    }
    let names = ["G2-K", "G4-V0", "G6"];
    let xs: Vec<f64> = lams.iter().map(|l| l.ln()).collect();
    let mut out = Vec::new();
    for (name, ns) in names.into_iter().zip(norms) {
        if ns.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err(Error::Numeric(format!("degenerate fit: channel {name} has a vanishing deviation")));
        }
        let ys: Vec<f64> = ns.iter().map(|v| v.ln()).collect();
        out.push(ScalingFit { channel: name, slope: slope(&xs, &ys)?, norms: ns });
    }
    Ok(out)
}

fn slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Numeric("degenerate fit: couplings coincide".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}
