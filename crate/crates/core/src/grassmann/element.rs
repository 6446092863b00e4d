use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_complex::Complex64;

use super::coeff::{Coeff, LamPoly};
use crate::error::{Error, Result};

/// Sign of merging the ascending sequence `a` followed by `b` into ascending order.
pub fn merge_sign(a: u64, b: u64) -> f64 {
    let mut swaps = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        rest &= rest - 1;
        let above = if j == 63 { 0 } else { a >> (j + 1) };
        swaps += above.count_ones();
    }
    if swaps % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Sparse Grassmann element. Generators `0..n_ext` are external, the rest
/// internal; a monomial is the bit set of its generators in ascending order.
#[derive(Clone, Debug, PartialEq)]
pub struct Grassmann<C: Coeff> {
    n_gen: usize,
    n_ext: usize,
    degree_cap: Option<u32>,
    terms: BTreeMap<u64, C>,
}

pub type ExactElement = Grassmann<Complex64>;

impl<C: Coeff> Grassmann<C> {
    pub fn zero(n_gen: usize, n_ext: usize) -> Result<Self> {
        if n_gen > C::MAX_GENERATORS {
            return Err(Error::Capacity(format!(
                "{n_gen} generators exceed the backend limit {}",
                C::MAX_GENERATORS
            )));
        }
        Self::zero_unchecked(n_gen, n_ext)
    }

    pub(crate) fn zero_unchecked(n_gen: usize, n_ext: usize) -> Result<Self> {
        if n_gen > 64 || n_ext > n_gen {
            return Err(Error::Capacity(format!("{n_gen} generators do not fit a 64-bit subset")));
        }
        Ok(Grassmann { n_gen, n_ext, degree_cap: None, terms: BTreeMap::new() })
    }

    pub fn constant(n_gen: usize, n_ext: usize, c: C) -> Result<Self> {
        let mut g = Self::zero(n_gen, n_ext)?;
        g.add_term(0, c);
        Ok(g)
    }

    pub fn one(n_gen: usize, n_ext: usize) -> Result<Self> {
        Self::constant(n_gen, n_ext, C::one())
    }

    /// `c · g_{i_1} ⋯ g_{i_k}` for the listed generators in the listed order.
    pub fn monomial(n_gen: usize, n_ext: usize, gens: &[usize], c: C) -> Result<Self> {
        let mut g = Self::zero(n_gen, n_ext)?;
        if let Some((bits, sign)) = g.ordered_bits(gens)? {
            g.add_term(bits, c.scale(Complex64::new(sign, 0.0)));
        }
        Ok(g)
    }

    pub fn generator(n_gen: usize, n_ext: usize, i: usize) -> Result<Self> {
        Self::monomial(n_gen, n_ext, &[i], C::one())
    }

    /// Bit set and reordering sign of a generator word; `None` if a generator repeats.
    pub fn ordered_bits(&self, gens: &[usize]) -> Result<Option<(u64, f64)>> {
        let mut bits = 0u64;
        let mut sign = 1.0;
        for &g in gens {
            if g >= self.n_gen {
                return Err(Error::usage(format!("generator {g} outside 0..{}", self.n_gen)));
            }
            let b = 1u64 << g;
            if bits & b != 0 {
                return Ok(None);
            }
            if (bits >> g).count_ones() % 2 == 1 {
                sign = -sign;
            }
            bits |= b;
        }
        Ok(Some((bits, sign)))
    }

    pub fn with_degree_cap(mut self, cap: Option<u32>) -> Self {
        self.degree_cap = cap;
        if let Some(cap) = cap {
            self.terms.retain(|k, _| k.count_ones() <= cap);
        }
        self
    }

    pub fn degree_cap(&self) -> Option<u32> {
        self.degree_cap
    }

    pub fn n_gen(&self) -> usize {
        self.n_gen
    }

    pub fn n_ext(&self) -> usize {
        self.n_ext
    }

    pub fn n_int(&self) -> usize {
        self.n_gen - self.n_ext
    }

    pub fn ext_mask(&self) -> u64 {
        if self.n_ext == 64 {
            u64::MAX
        } else {
            (1u64 << self.n_ext) - 1
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (u64, &C)> + '_ {
        self.terms.iter().map(|(k, v)| (*k, v))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn get(&self, bits: u64) -> C {
        self.terms.get(&bits).cloned().unwrap_or_else(C::zero)
    }

    pub fn body(&self) -> C {
        self.get(0)
    }

    pub fn add_term(&mut self, bits: u64, c: C) {
        if c.is_zero() {
            return;
        }
        if self.degree_cap.is_some_and(|cap| bits.count_ones() > cap) {
            return;
        }
        match self.terms.get_mut(&bits) {
            Some(v) => {
                v.add_assign(&c);
                if v.is_zero() {
                    self.terms.remove(&bits);
                }
            }
            None => {
                self.terms.insert(bits, c);
            }
        }
    }

    fn empty_like(&self) -> Self {
        Grassmann { n_gen: self.n_gen, n_ext: self.n_ext, degree_cap: self.degree_cap, terms: BTreeMap::new() }
    }

    pub(crate) fn from_map(&self, map: HashMap<u64, C>) -> Self {
        let mut out = self.empty_like();
        out.terms = map
            .into_iter()
            .filter(|(k, v)| !v.is_zero() && self.degree_cap.map_or(true, |cap| k.count_ones() <= cap))
            .collect();
        out
    }

    pub fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.n_gen != other.n_gen || self.n_ext != other.n_ext {
            return Err(Error::usage("grassmann elements over different generator sets"));
        }
        Ok(())
    }

    pub fn is_even(&self) -> bool {
        self.terms.keys().all(|k| k.count_ones() % 2 == 0)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (k, v) in other.terms() {
            out.add_term(k, v.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = self.empty_like();
        for (k, v) in self.terms() {
            out.add_term(k, v.scale(s));
        }
        out
    }

    pub fn scale_coeff(&self, s: &C) -> Self {
        let mut out = self.empty_like();
        for (k, v) in self.terms() {
            out.add_term(k, v.mul(s));
        }
        out
    }

    /// Restrict to monomials with `m` external and `n` internal generators.
    pub fn part(&self, m: u32, n: u32) -> Self {
        let ext = self.ext_mask();
        let mut out = self.empty_like();
        for (k, v) in self.terms() {
            if (k & ext).count_ones() == m && (k & !ext).count_ones() == n {
                out.add_term(k, v.clone());
            }
        }
        out
    }

    /// Monomials of total degree in `lo..=hi`.
    pub fn part_degrees(&self, lo: u32, hi: u32) -> Self {
        let mut out = self.empty_like();
        for (k, v) in self.terms() {
            if (lo..=hi).contains(&k.count_ones()) {
                out.add_term(k, v.clone());
            }
        }
        out
    }

    /// Distinct `(m, n)` bidegrees present.
    pub fn bidegrees(&self) -> Vec<(u32, u32)> {
        let ext = self.ext_mask();
        let mut v: Vec<(u32, u32)> =
            self.terms.keys().map(|k| ((k & ext).count_ones(), (k & !ext).count_ones())).collect();
        v.sort();
        v.dedup();
        v
    }

    /// Exterior product; coupling orders above the ring's truncation and
    /// degrees above the cap are dropped without being formed.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let cap = match (self.degree_cap, other.degree_cap) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        let max_order = C::max_order();
        // bucket the right factor by (lowest coupling order, degree)
        let mut buckets: BTreeMap<(usize, u32), Vec<(u64, &C)>> = BTreeMap::new();
        for (k, v) in other.terms() {
            buckets.entry((v.min_order(), k.count_ones())).or_default().push((k, v));
        }
        let mut acc: HashMap<u64, C> = HashMap::new();
        for (a, va) in self.terms() {
            let oa = va.min_order();
            let da = a.count_ones();
            for (&(ob, db), list) in &buckets {
                if oa + ob > max_order {
                    break;
                }
                if cap.is_some_and(|c| da + db > c) {
                    continue;
                }
                for &(b, vb) in list {
                    if a & b != 0 {
                        continue;
                    }
                    let p = va.mul(vb);
                    if p.is_zero() {
                        continue;
                    }
                    let p = if merge_sign(a, b) < 0.0 { p.neg() } else { p };
                    acc.entry(a | b).and_modify(|e| e.add_assign(&p)).or_insert(p);
                }
            }
        }
        let mut out = self.from_map(acc);
        out.degree_cap = cap;
        Ok(out)
    }

    fn nilpotent_part(&self) -> Self {
        let mut x = self.clone();
        x.terms.remove(&0);
        x
    }

    /// `e^b Σ xⁿ/n!` for `F = b + x`.
    pub fn exp(&self) -> Result<Self> {
        let b = self.body();
        let x = self.nilpotent_part();
        let mut acc = self.empty_like();
        acc.add_term(0, C::one());
        let mut term = acc.clone();
        for n in 1..=self.n_gen + 1 {
            term = term.mul(&x)?.scale(Complex64::new(1.0 / n as f64, 0.0));
            if term.is_empty() {
                break;
            }
            acc = acc.add(&term)?;
        }
        Ok(acc.scale_coeff(&b.exp()))
    }

    /// `log b + Σ (-1)^{n+1} yⁿ/n` for `F = b(1 + y)`.
    pub fn log(&self) -> Result<Self> {
        let b = self.body();
        let binv = b.inv().map_err(|_| Error::domain("logarithm of an element with zero body"))?;
        let y = self.nilpotent_part().scale_coeff(&binv);
        let mut acc = self.empty_like();
        acc.add_term(0, b.ln()?);
        let mut power = y.clone();
        for n in 1..=self.n_gen + 1 {
            if power.is_empty() {
                break;
            }
            let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
            acc = acc.add(&power.scale(Complex64::new(sign / n as f64, 0.0)))?;
            power = power.mul(&y)?;
        }
        Ok(acc)
    }

    /// Largest coefficient magnitude.
    pub fn max_abs(&self) -> f64 {
        self.terms.values().fold(0.0, |a, c| a.max(c.magnitude()))
    }

    /// Largest coefficient magnitude of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        Ok(self.sub(other)?.max_abs())
    }

    /// Map coefficients into another ring.
    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> Result<Grassmann<D>> {
        let mut out = Grassmann::<D>::zero_unchecked(self.n_gen, self.n_ext)?.with_degree_cap(self.degree_cap);
        for (k, v) in self.terms() {
            out.add_term(k, f(v));
        }
        Ok(out)
    }

    /// Debug listing `(subset, coefficient)` in canonical order.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.terms() {
            let gens: Vec<String> = (0..64).filter(|i| k >> i & 1 == 1).map(|i| i.to_string()).collect();
            s.push_str(&format!("{{{}}} {:?}\n", gens.join(","), v));
        }
        s
    }
}

impl<const K: usize> Grassmann<LamPoly<K>> {
    /// Coefficient of `λ^k` as an exact element.
    pub fn order(&self, k: usize) -> Result<ExactElement> {
        let mut out = Grassmann::<Complex64>::zero_unchecked(self.n_gen, self.n_ext)?;
        for (bits, v) in self.terms() {
            out.add_term(bits, v.coeff(k));
        }
        Ok(out)
    }

    /// Substitute a numeric coupling.
    pub fn eval(&self, lam: Complex64) -> Result<ExactElement> {
        let mut out = Grassmann::<Complex64>::zero_unchecked(self.n_gen, self.n_ext)?;
        for (bits, v) in self.terms() {
            out.add_term(bits, v.eval(lam));
        }
        Ok(out)
    }
}

impl ExactElement {
    /// `λ F` in the truncated ring.
    pub fn with_coupling<const K: usize>(&self, order: usize) -> Result<Grassmann<LamPoly<K>>> {
        self.map_coeffs(|c| LamPoly::<K>::monomial(order, *c))
    }
}

impl<C: Coeff> fmt::Display for Grassmann<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.dump())
    }
}
