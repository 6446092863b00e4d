use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;

use super::coeff::Coeff;
use super::element::{ExactElement, Grassmann};
use super::pfaffian::CovarianceMatrix;
use crate::error::{Error, Result};
use crate::kernel::{unpack, Kernel, SeminormOptions, MAX_SLOTS};
use crate::lattice::Lattice;
use crate::norm::{NormElement, SaturatedSet};
use crate::perm::{factorial, signed_permutations};

/// Ordered external and internal generators, one per chosen base point.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorSet {
    lattice: Arc<Lattice>,
    external: Vec<usize>,
    internal: Vec<usize>,
    ext_pos: HashMap<usize, usize>,
    int_pos: HashMap<usize, usize>,
}

impl GeneratorSet {
    pub fn new(lattice: Arc<Lattice>, external: Vec<usize>, internal: Vec<usize>) -> Result<Self> {
        let npts = lattice.npts();
        let mut ext_pos = HashMap::new();
        let mut int_pos = HashMap::new();
        for (i, &p) in external.iter().enumerate() {
            if p >= npts || ext_pos.insert(p, i).is_some() {
                return Err(Error::usage(format!("external generator point {p} invalid or repeated")));
            }
        }
        for (i, &p) in internal.iter().enumerate() {
            if p >= npts || ext_pos.contains_key(&p) || int_pos.insert(p, i).is_some() {
                return Err(Error::usage(format!("internal generator point {p} invalid or repeated")));
            }
        }
        if external.len() + internal.len() > 64 {
            return Err(Error::Capacity("more than 64 generators".into()));
        }
        Ok(GeneratorSet { lattice, external, internal, ext_pos, int_pos })
    }

    /// Every base point as an internal generator.
    pub fn all_internal(lattice: Arc<Lattice>) -> Result<Self> {
        let pts = (0..lattice.npts()).collect();
        Self::new(lattice, Vec::new(), pts)
    }

    pub fn lattice(&self) -> &Arc<Lattice> {
        &self.lattice
    }

    pub fn external(&self) -> &[usize] {
        &self.external
    }

    pub fn internal(&self) -> &[usize] {
        &self.internal
    }

    pub fn n_ext(&self) -> usize {
        self.external.len()
    }

    pub fn n_gen(&self) -> usize {
        self.external.len() + self.internal.len()
    }

    pub fn external_generator(&self, point: usize) -> Option<usize> {
        self.ext_pos.get(&point).copied()
    }

    pub fn internal_generator(&self, point: usize) -> Option<usize> {
        self.int_pos.get(&point).map(|i| i + self.external.len())
    }

    /// Base point carried by generator `g`.
    pub fn point_of(&self, g: usize) -> usize {
        if g < self.external.len() {
            self.external[g]
        } else {
            self.internal[g - self.external.len()]
        }
    }

    pub fn zero<C: Coeff>(&self) -> Result<Grassmann<C>> {
        Grassmann::zero(self.n_gen(), self.n_ext())
    }

    /// Covariance matrix of a two-point kernel on the internal generators.
    pub fn covariance(&self, c: &Kernel) -> Result<CovarianceMatrix> {
        CovarianceMatrix::from_kernel(c, &self.internal)
    }

    /// Two-point kernel carried by a covariance matrix, both triangles filled.
    pub fn covariance_kernel(&self, c: &CovarianceMatrix) -> Result<Kernel> {
        let mut k = Kernel::new(self.lattice.clone(), 0, 2)?;
        for i in 0..c.dim() {
            for j in 0..c.dim() {
                if i != j {
                    k.set(&[self.internal[i], self.internal[j]], c.get(i, j))?;
                }
            }
        }
        Ok(k)
    }
}

/// `Gr(f) = ∫ f(η; ξ) φ(η_1)⋯φ(η_m) ψ(ξ_1)⋯ψ(ξ_n)` with lattice weights.
pub fn gr_from_kernel(f: &Kernel, gens: &GeneratorSet) -> Result<ExactElement> {
    gr_from_kernel_in(f, gens, |c| c)
}

/// [`gr_from_kernel`] into any coefficient ring, lifting each coefficient.
pub fn gr_from_kernel_in<C: Coeff>(
    f: &Kernel,
    gens: &GeneratorSet,
    lift: impl Fn(Complex64) -> C,
) -> Result<Grassmann<C>> {
    let (m, n) = (f.m(), f.n());
    if m > gens.n_ext() || n > gens.internal.len() {
        return Err(Error::usage("kernel arity exceeds the generator set"));
    }
    let w = f.lattice().cell_volume().powi((m + n) as i32);
    let mut acc: HashMap<u64, Complex64> = HashMap::new();
    let mut out: Grassmann<C> = gens.zero()?;
    let mut word = Vec::with_capacity(m + n);
    for (k, v) in f.entries() {
        let p = unpack(k, m + n);
        word.clear();
        for (s, &x) in p[..m + n].iter().enumerate() {
            let g = if s < m { gens.external_generator(x) } else { gens.internal_generator(x) };
            let g = g.ok_or_else(|| Error::usage(format!("kernel support point {x} has no generator")))?;
            word.push(g);
        }
        if let Some((bits, sign)) = out.ordered_bits(&word)? {
            *acc.entry(bits).or_default() += v * (sign * w);
        }
    }
    let mut keys: Vec<u64> = acc.keys().copied().collect();
    keys.sort_unstable();
    for bits in keys {
        let c = acc[&bits];
        if c != Complex64::default() {
            out.add_term(bits, lift(c));
        }
    }
    Ok(out)
}

/// The externally and internally antisymmetric kernel whose `Gr` is the
/// degree-`(m, n)` part of `F`.
pub fn kernel_from_gr(f: &ExactElement, gens: &GeneratorSet, m: usize, n: usize) -> Result<Kernel> {
    if m + n > MAX_SLOTS {
        return Err(Error::Capacity(format!("arity {} exceeds {MAX_SLOTS} slots", m + n)));
    }
    if f.n_gen() != gens.n_gen() || f.n_ext() != gens.n_ext() {
        return Err(Error::usage("element and generator set disagree"));
    }
    let lat = gens.lattice.clone();
    let norm = lat.cell_volume().powi((m + n) as i32) * factorial(m) * factorial(n);
    let pm = signed_permutations(m);
    let pn = signed_permutations(n);
    let mut out = Kernel::new(lat, m, n)?;
    let part = f.part(m as u32, n as u32);
    let mut pts = vec![0usize; m + n];
    for (bits, v) in part.terms() {
        let gs: Vec<usize> = (0..64).filter(|i| bits >> i & 1 == 1).map(|g| gens.point_of(g)).collect();
        let base = v / norm;
        for (pi, si) in &pm {
            for (s, &t) in pi.iter().enumerate() {
                pts[s] = gs[t];
            }
            for (sigma, ss) in &pn {
                for (s, &t) in sigma.iter().enumerate() {
                    pts[m + s] = gs[m + t];
                }
                out.add_at(&pts, base * (si * ss))?;
            }
        }
    }
    out.set_flags(true, true);
    Ok(out)
}

/// `(1/b²) 𝔠 Σ_{m,n} αⁿ bⁿ ρ(m,n) ‖W_{m,n}‖_{1,∞}`; the body is not counted.
#[allow(clippy::too_many_arguments)]
pub fn n_functional(
    w: &ExactElement,
    gens: &GeneratorSet,
    c: &NormElement,
    b: f64,
    alpha: f64,
    domain: &Arc<SaturatedSet>,
    rho: &dyn Fn(usize, usize) -> f64,
    opts: SeminormOptions,
) -> Result<NormElement> {
    if b <= 0.0 || alpha <= 0.0 {
        return Err(Error::usage("b and alpha must be positive"));
    }
    let mut sum = NormElement::zero(domain.clone());
    for (m, n) in w.bidegrees() {
        let (m, n) = (m as usize, n as usize);
        if m + n == 0 {
            continue;
        }
        let k = kernel_from_gr(w, gens, m, n)?;
        let weight = alpha.powi(n as i32) * b.powi(n as i32) * rho(m, n);
        sum = sum.add(&k.seminorm_1inf(domain, opts).scale(weight))?;
    }
    Ok(c.mul(&sum)?.scale(1.0 / (b * b)))
}

/// Unit weight `ρ ≡ 1`.
pub fn unit_rho(_m: usize, _n: usize) -> f64 {
    1.0
}
