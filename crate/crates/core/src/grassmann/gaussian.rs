use std::collections::HashMap;

use num_complex::Complex64;
use rand::seq::index::sample;
use rand::Rng;

use super::coeff::Coeff;
use super::element::Grassmann;
use super::pfaffian::CovarianceMatrix;
use crate::error::{Error, Result};
use crate::sample as draw;

/// Generator count allowed on the brute-force oracle paths.
pub const ORACLE_LIMIT: usize = 12;

fn check_cov<C: Coeff>(f: &Grassmann<C>, c: &CovarianceMatrix) -> Result<()> {
    if c.dim() != f.n_int() {
        return Err(Error::usage(format!(
            "covariance has dimension {} but the element has {} internal generators",
            c.dim(),
            f.n_int()
        )));
    }
    Ok(())
}

fn bits_of(mut k: u64) -> Vec<usize> {
    let mut v = Vec::with_capacity(k.count_ones() as usize);
    while k != 0 {
        v.push(k.trailing_zeros() as usize);
        k &= k - 1;
    }
    v
}

/// Replace the generators in `mask` (which sit above every other generator
/// of the monomial) by the Pfaffian of `c` on their indices `bit - offset`.
fn integrate_top<C: Coeff>(
    f: &Grassmann<C>,
    c: &CovarianceMatrix,
    mask: u64,
    offset: usize,
    n_gen_out: usize,
    n_ext_out: usize,
) -> Result<Grassmann<C>> {
    let mut cache: HashMap<u64, Complex64> = HashMap::new();
    let mut acc: HashMap<u64, C> = HashMap::new();
    for (k, v) in f.terms() {
        let top = k & mask;
        let rest = k & !mask;
        if top.count_ones() % 2 == 1 {
            continue;
        }
        let pf = match cache.get(&top) {
            Some(p) => *p,
            None => {
                let idx: Vec<usize> = bits_of(top).into_iter().map(|b| b - offset).collect();
                let p = c.pfaffian_of(&idx)?;
                cache.insert(top, p);
                p
            }
        };
        if pf == Complex64::default() {
            continue;
        }
        let t = v.scale(pf);
        acc.entry(rest).and_modify(|e| e.add_assign(&t)).or_insert(t);
    }
    let shell = Grassmann::<C>::zero_unchecked(n_gen_out, n_ext_out)?.with_degree_cap(f.degree_cap());
    Ok(shell.from_map(acc))
}

/// `∫ F dμ_C`, integrating out every internal generator.
pub fn gaussian_integral<C: Coeff>(f: &Grassmann<C>, c: &CovarianceMatrix) -> Result<Grassmann<C>> {
    check_cov(f, c)?;
    let mask = !f.ext_mask() & if f.n_gen() == 64 { u64::MAX } else { (1u64 << f.n_gen()) - 1 };
    integrate_top(f, c, mask, f.n_ext(), f.n_gen(), f.n_ext())
}

/// One application of `Δ_C = ½ Σ C(ξ,ξ') ∂_ξ ∂_ξ'`.
pub fn laplacian<C: Coeff>(f: &Grassmann<C>, c: &CovarianceMatrix) -> Result<Grassmann<C>> {
    check_cov(f, c)?;
    let n_ext = f.n_ext();
    let mut acc: HashMap<u64, C> = HashMap::new();
    for (k, v) in f.terms() {
        let gens = bits_of(k);
        let first_int = gens.iter().position(|&g| g >= n_ext).unwrap_or(gens.len());
        for rp in first_int..gens.len() {
            for rq in rp + 1..gens.len() {
                let cv = c.get(gens[rp] - n_ext, gens[rq] - n_ext);
                if cv == Complex64::default() {
                    continue;
                }
                let sign = if (rp + rq) % 2 == 1 { 1.0 } else { -1.0 };
                let t = v.scale(cv * sign);
                let key = k ^ (1u64 << gens[rp]) ^ (1u64 << gens[rq]);
                acc.entry(key).and_modify(|e| e.add_assign(&t)).or_insert(t);
            }
        }
    }
    Ok(f.from_map(acc))
}

/// `∫ F(φ, ψ + ζ) dμ_C(ζ)` as `exp(Δ_C) F`.
pub fn shift_convolve<C: Coeff>(f: &Grassmann<C>, c: &CovarianceMatrix) -> Result<Grassmann<C>> {
    check_cov(f, c)?;
    let mut acc = f.clone();
    let mut term = f.clone();
    for k in 1..=f.n_int() / 2 + 1 {
        term = laplacian(&term, c)?.scale(Complex64::new(1.0 / k as f64, 0.0));
        if term.is_empty() {
            break;
        }
        acc = acc.add(&term)?;
    }
    Ok(acc)
}

/// Same map by substituting `ψ → ψ + ζ` over doubled generators and
/// integrating `ζ` out.
pub fn shift_convolve_doubled<C: Coeff>(f: &Grassmann<C>, c: &CovarianceMatrix) -> Result<Grassmann<C>> {
    check_cov(f, c)?;
    let (n_gen, n_ext, n_int) = (f.n_gen(), f.n_ext(), f.n_int());
    if n_int > ORACLE_LIMIT || n_gen + n_int > 64 {
        return Err(Error::Capacity(format!("doubled-generator path limited to {ORACLE_LIMIT} internal generators")));
    }
    let mut doubled = Grassmann::<C>::zero_unchecked(n_gen + n_int, n_ext)?;
    for (k, v) in f.terms() {
        let gens = bits_of(k);
        let ints: Vec<usize> = (0..gens.len()).filter(|&r| gens[r] >= n_ext).collect();
        for choice in 0u64..(1u64 << ints.len()) {
            let mut word = gens.clone();
            for (b, &r) in ints.iter().enumerate() {
                if choice >> b & 1 == 1 {
                    word[r] = gens[r] - n_ext + n_gen;
                }
            }
            if let Some((bits, sign)) = doubled.ordered_bits(&word)? {
                doubled.add_term(bits, v.scale(Complex64::new(sign, 0.0)));
            }
        }
    }
    let zeta = ((1u64 << n_int) - 1) << n_gen;
    let out = integrate_top(&doubled, c, zeta, n_gen, n_gen, n_ext)?;
    Ok(out.with_degree_cap(f.degree_cap()))
}

/// `:F:_C`, defined as convolution with `-C`.
pub fn wick_order<C: Coeff>(f: &Grassmann<C>, c: &CovarianceMatrix) -> Result<Grassmann<C>> {
    shift_convolve(f, &c.scale(Complex64::new(-1.0, 0.0)))
}

/// `Ω_C(W) = log (1/Z) ∫ e^{W(ψ+ζ)} dμ_C(ζ)`.
pub fn omega<C: Coeff>(w: &Grassmann<C>, c: &CovarianceMatrix) -> Result<Grassmann<C>> {
    omega_with_log_cap(w, c, None)
}

/// As [`omega`], keeping only monomials of degree at most `log_cap` once the
/// convolution is done; coefficients of retained degrees are exact.
pub fn omega_with_log_cap<C: Coeff>(
    w: &Grassmann<C>,
    c: &CovarianceMatrix,
    log_cap: Option<u32>,
) -> Result<Grassmann<C>> {
    if !w.is_even() {
        return Err(Error::usage("the renormalization group map needs an even element"));
    }
    let g = shift_convolve(&w.exp()?, c)?;
    let z = g.body();
    let zinv = z.inv().map_err(|_| Error::Numeric("vanishing partition function body".into()))?;
    let cap = match (log_cap, w.degree_cap()) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    };
    g.scale_coeff(&zinv).with_degree_cap(cap).log()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SEstimate {
    pub value: f64,
    /// True when every even subset up to `m_max` was visited.
    pub exhaustive: bool,
    pub m_max: usize,
    pub tuples: usize,
}

pub const S_EXHAUSTIVE_LIMIT: usize = 8;
pub const S_SAMPLES: usize = 10_000;

/// `max |∫ ψ(ξ_1)⋯ψ(ξ_m) dμ_C|^{1/m}` over even `m ≤ m_max`. Exhaustive
/// for small matrices; otherwise every pair plus `samples` seeded subsets.
pub fn s_empirical(c: &CovarianceMatrix, m_max: usize, samples: usize, seed: u64) -> Result<SEstimate> {
    let n = c.dim();
    if m_max > n {
        return Err(Error::usage(format!("m_max {m_max} exceeds generator count {n}")));
    }
    let mut best: f64 = 0.0;
    let mut tuples = 0;
    let mut visit = |idx: &[usize]| -> Result<()> {
        let p = c.pfaffian_of(idx)?;
        best = best.max(p.norm().powf(1.0 / idx.len() as f64));
        Ok(())
    };
    let exhaustive = n <= S_EXHAUSTIVE_LIMIT;
    if exhaustive {
        for mask in 1u64..(1u64 << n) {
            let k = mask.count_ones() as usize;
            if k % 2 == 0 && k <= m_max {
                visit(&bits_of(mask))?;
                tuples += 1;
            }
        }
    } else {
        for i in 0..n {
            for j in i + 1..n {
                visit(&[i, j])?;
                tuples += 1;
            }
        }
        if m_max >= 4 {
            let mut rng = draw::rng(seed, 0x5e);
            let evens: Vec<usize> = (4..=m_max).step_by(2).collect();
            for _ in 0..samples {
                let m = evens[rng.gen_range(0..evens.len())];
                let mut idx = sample(&mut rng, n, m).into_vec();
                idx.sort_unstable();
                visit(&idx)?;
                tuples += 1;
            }
        }
    }
    Ok(SEstimate { value: best, exhaustive, m_max, tuples })
}
