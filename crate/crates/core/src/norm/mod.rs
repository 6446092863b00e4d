//! Truncated formal power series in `t_0, ..., t_d` with coefficients in
//! `[0, +inf]`, stored on a finite saturated (downward closed) index set.
//!
//! Coefficients outside the index set are `+inf` by convention and are never
//! stored. Products follow the extended-real rule `0 * inf = inf`, including
//! inside convolution sums, so the zero series times a series carrying an
//! infinite coefficient is not zero.

mod majorant;

pub use majorant::{majorant_constant, Majorant, ScalarSeries};

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde_json::{json, Value};

use crate::error::{Error, Result};

/// Multiindex `(δ_0, δ_1, ..., δ_d)`; entry 0 is temporal.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zero(d: usize) -> Self {
        MultiIndex(vec![0; d + 1])
    }

    pub fn unit(d: usize, j: usize) -> Self {
        let mut v = vec![0; d + 1];
        v[j] = 1;
        MultiIndex(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }

    pub fn len_total(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn len_spatial(&self) -> u32 {
        self.0[1..].iter().sum()
    }

    pub fn temporal(&self) -> u32 {
        self.0[0]
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn factorial(&self) -> f64 {
        self.0.iter().map(|&e| factorial(e)).product()
    }

    pub fn leq(&self, other: &MultiIndex) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        let mut out = Vec::with_capacity(self.0.len());
        for (a, b) in self.0.iter().zip(&other.0) {
            out.push(a.checked_sub(*b)?);
        }
        Some(MultiIndex(out))
    }

    pub fn scaled(&self, n: u32) -> MultiIndex {
        MultiIndex(self.0.iter().map(|a| a * n).collect())
    }

    /// All multiindices `δ' <= self` in lexicographic order.
    pub fn lower_set(&self) -> Vec<MultiIndex> {
        let mut out = vec![Vec::new()];
        for &e in &self.0 {
            let mut next = Vec::with_capacity(out.len() * (e as usize + 1));
            for prefix in &out {
                for k in 0..=e {
                    let mut p: Vec<u32> = prefix.clone();
                    p.push(k);
                    next.push(p);
                }
            }
            out = next;
        }
        out.into_iter().map(MultiIndex).collect()
    }

    /// Multinomial `δ! / (δ'! (δ-δ')!)`.
    pub fn binomial(&self, part: &MultiIndex) -> f64 {
        self.0
            .iter()
            .zip(&part.0)
            .map(|(&n, &k)| binomial(n, k))
            .product()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

pub fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

pub fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * f64::from(n - i) / f64::from(i + 1);
    }
    acc.round()
}

/// Finite downward closed set of multiindices, stored sorted lexicographically.
#[derive(Clone, Debug)]
pub struct SaturatedSet {
    d: usize,
    members: Vec<MultiIndex>,
    index: HashMap<MultiIndex, usize>,
    // for each member δ: pairs (pos β, pos δ-β) with β running lexicographically
    splits: Vec<Vec<(usize, usize)>>,
}

impl PartialEq for SaturatedSet {
    fn eq(&self, other: &Self) -> bool {
        self.d == other.d && self.members == other.members
    }
}

impl SaturatedSet {
    pub fn new(d: usize, members: impl IntoIterator<Item = MultiIndex>) -> Result<Self> {
        let mut members: Vec<MultiIndex> = members.into_iter().collect();
        members.sort();
        members.dedup();
        if members.is_empty() {
            return Err(Error::usage("saturated set must be nonempty"));
        }
        for m in &members {
            if m.0.len() != d + 1 {
                return Err(Error::usage(format!("multiindex {m} has wrong length for d={d}")));
            }
        }
        let index: HashMap<MultiIndex, usize> =
            members.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
        for m in &members {
            for lower in m.lower_set() {
                if !index.contains_key(&lower) {
                    return Err(Error::usage(format!(
                        "set is not downward closed: {m} present but {lower} missing"
                    )));
                }
            }
        }
        let splits = members
            .iter()
            .map(|delta| {
                delta
                    .lower_set()
                    .into_iter()
                    .map(|beta| {
                        let gamma = delta.checked_sub(&beta).expect("beta <= delta");
                        (index[&beta], index[&gamma])
                    })
                    .collect()
            })
            .collect();
        Ok(SaturatedSet { d, members, index, splits })
    }

    /// `{δ : δ_0 <= r0, |δ_spatial| <= r}`.
    pub fn boxed(d: usize, r0: u32, r: u32) -> Self {
        let mut members = Vec::new();
        for spatial in spatial_indices(d, r) {
            for t in 0..=r0 {
                let mut v = vec![t];
                v.extend_from_slice(&spatial);
                members.push(MultiIndex(v));
            }
        }
        SaturatedSet::new(d, members).expect("box is saturated")
    }

    /// `{δ : |δ| <= q}`.
    pub fn total_degree(d: usize, q: u32) -> Self {
        let members = spatial_indices(d + 1, q).into_iter().map(MultiIndex).collect::<Vec<_>>();
        SaturatedSet::new(d, members).expect("simplex is saturated")
    }

    pub fn origin(d: usize) -> Self {
        SaturatedSet::new(d, [MultiIndex::zero(d)]).expect("origin is saturated")
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn members(&self) -> &[MultiIndex] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn position(&self, delta: &MultiIndex) -> Option<usize> {
        self.index.get(delta).copied()
    }

    /// For each member `δ`, the position pairs `(β, δ - β)` with `β <= δ`.
    pub(crate) fn splits(&self) -> &[Vec<(usize, usize)>] {
        &self.splits
    }

    pub fn contains(&self, delta: &MultiIndex) -> bool {
        self.index.contains_key(delta)
    }

    /// Smallest `n` with `X^n = 0` on the domain for every `X` with `X_0 = 0`.
    pub fn nilpotency_order(&self) -> u32 {
        self.members.iter().map(MultiIndex::len_total).max().unwrap_or(0) + 1
    }

    /// Minimal `n >= 1` with `nδ ∉ Δ` for every nonzero `δ ∈ Δ`, by brute force.
    pub fn n_of(&self) -> u32 {
        let max_deg = self.members.iter().map(MultiIndex::len_total).max().unwrap_or(0);
        for n in 1..=max_deg + 1 {
            if self
                .members
                .iter()
                .filter(|m| !m.is_zero())
                .all(|m| !self.contains(&m.scaled(n)))
            {
                return n;
            }
        }
        max_deg + 1
    }
}

/// Nonnegative integer vectors of length `len` with entry sum `<= q`, lexicographic.
fn spatial_indices(len: usize, q: u32) -> Vec<Vec<u32>> {
    if len == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for first in 0..=q {
        for rest in spatial_indices(len - 1, q - first) {
            let mut v = vec![first];
            v.extend(rest);
            out.push(v);
        }
    }
    out.sort();
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Op {
    Add,
    Mul,
    Max,
    Min,
}

/// Extended-real product with `0 * inf = inf`.
#[inline]
pub fn ext_mul(a: f64, b: f64) -> f64 {
    if a.is_infinite() || b.is_infinite() {
        f64::INFINITY
    } else {
        a * b
    }
}

/// Element of the norm domain restricted to a saturated set.
#[derive(Clone, Debug)]
pub struct NormElement {
    domain: Arc<SaturatedSet>,
    coeffs: Vec<f64>,
}

impl PartialEq for NormElement {
    fn eq(&self, other: &Self) -> bool {
        self.same_domain(other) && self.coeffs == other.coeffs
    }
}

impl NormElement {
    pub fn zero(domain: Arc<SaturatedSet>) -> Self {
        let n = domain.len();
        NormElement { domain, coeffs: vec![0.0; n] }
    }

    pub fn constant(domain: Arc<SaturatedSet>, c: f64) -> Self {
        let mut x = NormElement::zero(domain);
        x.coeffs[0] = c;
        x
    }

    pub fn infinite(domain: Arc<SaturatedSet>) -> Self {
        let n = domain.len();
        NormElement { domain, coeffs: vec![f64::INFINITY; n] }
    }

    pub fn from_fn(domain: Arc<SaturatedSet>, mut f: impl FnMut(&MultiIndex) -> f64) -> Self {
        let coeffs = domain.members().iter().map(&mut f).collect::<Vec<_>>();
        let x = NormElement { domain, coeffs };
        debug_assert!(x.coeffs.iter().all(|c| *c >= 0.0), "negative coefficient");
        x
    }

    pub fn from_coeffs(domain: Arc<SaturatedSet>, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != domain.len() {
            return Err(Error::usage("coefficient count does not match domain"));
        }
        if coeffs.iter().any(|c| c.is_nan() || *c < 0.0) {
            return Err(Error::domain("coefficients must lie in [0, +inf]"));
        }
        Ok(NormElement { domain, coeffs })
    }

    /// Monomial `c t^δ`; `δ` must lie in the domain.
    pub fn monomial(domain: Arc<SaturatedSet>, delta: &MultiIndex, c: f64) -> Result<Self> {
        let pos = domain
            .position(delta)
            .ok_or_else(|| Error::usage(format!("{delta} outside domain")))?;
        let mut x = NormElement::zero(domain);
        x.coeffs[pos] = c;
        Ok(x)
    }

    pub fn domain(&self) -> &Arc<SaturatedSet> {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MultiIndex, f64)> {
        self.domain.members().iter().zip(self.coeffs.iter().copied())
    }

    /// Coefficient at `δ`; `+inf` outside the domain.
    pub fn get(&self, delta: &MultiIndex) -> f64 {
        match self.domain.position(delta) {
            Some(p) => self.coeffs[p],
            None => f64::INFINITY,
        }
    }

    pub fn constant_term(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn same_domain(&self, other: &NormElement) -> bool {
        Arc::ptr_eq(&self.domain, &other.domain) || *self.domain == *other.domain
    }

    fn check(&self, other: &NormElement) -> Result<()> {
        if self.same_domain(other) {
            Ok(())
        } else {
            Err(Error::usage("norm elements live on different domains"))
        }
    }

    pub fn combine(&self, other: &NormElement, op: Op) -> Result<NormElement> {
        self.check(other)?;
        let coeffs = match op {
            Op::Add => self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
            Op::Max => self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.max(*b)).collect(),
            Op::Min => self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.min(*b)).collect(),
            Op::Mul => self
                .domain
                .splits
                .iter()
                .map(|pairs| {
                    pairs
                        .iter()
                        .fold(0.0, |acc, &(i, j)| acc + ext_mul(self.coeffs[i], other.coeffs[j]))
                })
                .collect(),
        };
        Ok(NormElement { domain: self.domain.clone(), coeffs })
    }

    pub fn add(&self, other: &NormElement) -> Result<NormElement> {
        self.combine(other, Op::Add)
    }

    pub fn mul(&self, other: &NormElement) -> Result<NormElement> {
        self.combine(other, Op::Mul)
    }

    pub fn max(&self, other: &NormElement) -> Result<NormElement> {
        self.combine(other, Op::Max)
    }

    pub fn min(&self, other: &NormElement) -> Result<NormElement> {
        self.combine(other, Op::Min)
    }

    /// Multiplication by a scalar in `[0, +inf]`, with `0 * inf = inf`.
    pub fn scale(&self, s: f64) -> NormElement {
        NormElement {
            domain: self.domain.clone(),
            coeffs: self.coeffs.iter().map(|c| ext_mul(s, *c)).collect(),
        }
    }

    pub fn powi(&self, n: u32) -> NormElement {
        let mut acc = NormElement::constant(self.domain.clone(), 1.0);
        for _ in 0..n {
            acc = acc.mul(self).expect("same domain");
        }
        acc
    }

    pub fn leq(&self, other: &NormElement) -> Result<bool> {
        self.check(other)?;
        Ok(self.coeffs.iter().zip(&other.coeffs).all(|(a, b)| a <= b))
    }

    /// First coefficient (in lexicographic order) where `self <= other` fails.
    pub fn first_violation(&self, other: &NormElement) -> Result<Option<(MultiIndex, f64, f64)>> {
        self.check(other)?;
        Ok(self
            .iter()
            .zip(other.coeffs.iter())
            .find(|((_, a), b)| a > *b)
            .map(|((m, a), b)| (m.clone(), a, *b)))
    }

    /// The part with vanishing constant term.
    pub fn without_constant(&self) -> NormElement {
        let mut x = self.clone();
        x.coeffs[0] = 0.0;
        x
    }

    /// `(a - X)^{-1} = (a - X_0)^{-1} Σ_n ((X - X_0)/(a - X_0))^n`, summed
    /// until the powers vanish on the domain (`n <= max |δ|`).
    pub fn geom_inverse(&self, a: f64) -> Result<NormElement> {
        let x0 = self.constant_term();
        if x0.is_infinite() {
            return Err(Error::domain("geometric inverse needs a finite constant term"));
        }
        if !(a > 0.0) || !(a - x0 > 0.0) {
            return Err(Error::domain(format!("geometric inverse needs a - X_0 > 0 (a={a}, X_0={x0})")));
        }
        let inv = 1.0 / (a - x0);
        let q = self.without_constant().scale(inv);
        let one = NormElement::constant(self.domain.clone(), 1.0);
        let mut power = one.clone();
        let mut acc = one;
        for _ in 1..self.domain.nilpotency_order() {
            power = power.mul(&q)?;
            acc = acc.add(&power)?;
        }
        Ok(acc.scale(inv))
    }

    /// Formal derivative in `t_j`; coefficients whose shifted index leaves the
    /// domain read `+inf`.
    pub fn derive(&self, j: usize) -> Result<NormElement> {
        let d = self.dim();
        if j > d {
            return Err(Error::usage(format!("axis {j} out of range for d={d}")));
        }
        let unit = MultiIndex::unit(d, j);
        let coeffs = self
            .domain
            .members()
            .iter()
            .map(|delta| {
                let shifted = delta.add(&unit);
                ext_mul(f64::from(delta.0[j] + 1), self.get(&shifted))
            })
            .collect();
        Ok(NormElement { domain: self.domain.clone(), coeffs })
    }

    /// `T_μ X = X/μ^{d+1} + μ/(d+1) Σ_j ∂_0 ... ∂_d ∂_j X`.
    pub fn t_mu(&self, mu: f64) -> Result<NormElement> {
        if !(mu > 0.0) {
            return Err(Error::domain("T_mu needs mu > 0"));
        }
        let d = self.dim();
        let mut all = self.clone();
        for axis in 0..=d {
            all = all.derive(axis)?;
        }
        let mut sum = NormElement::zero(self.domain.clone());
        for j in 0..=d {
            sum = sum.add(&all.derive(j)?)?;
        }
        let dd = (d + 1) as f64;
        self.scale(1.0 / mu.powi(d as i32 + 1)).add(&sum.scale(mu / dd))
    }

    pub fn to_json(&self) -> Value {
        let domain: Vec<Value> = self.domain.members().iter().map(|m| json!(m.0)).collect();
        let coefficients: Vec<Value> = self
            .iter()
            .map(|(m, c)| json!([m.0, crate::report::real_value(c)]))
            .collect();
        json!({ "d": self.dim(), "domain": domain, "coefficients": coefficients })
    }

    pub fn from_json(v: &Value) -> Result<NormElement> {
        let bad = || Error::usage("malformed norm element record");
        let d = v.get("d").and_then(Value::as_u64).ok_or_else(bad)? as usize;
        let parse_index = |m: &Value| -> Result<MultiIndex> {
            let arr = m.as_array().ok_or_else(bad)?;
            arr.iter()
                .map(|e| e.as_u64().map(|x| x as u32).ok_or_else(bad))
                .collect::<Result<Vec<_>>>()
                .map(MultiIndex)
        };
        let members = v
            .get("domain")
            .and_then(Value::as_array)
            .ok_or_else(bad)?
            .iter()
            .map(parse_index)
            .collect::<Result<Vec<_>>>()?;
        let domain = Arc::new(SaturatedSet::new(d, members)?);
        let mut x = NormElement::zero(domain.clone());
        for entry in v.get("coefficients").and_then(Value::as_array).ok_or_else(bad)? {
            let pair = entry.as_array().ok_or_else(bad)?;
            if pair.len() != 2 {
                return Err(bad());
            }
            let m = parse_index(&pair[0])?;
            let c = crate::report::parse_real(&pair[1]).ok_or_else(bad)?;
            let pos = domain.position(&m).ok_or_else(bad)?;
            x.coeffs[pos] = c;
        }
        Ok(x)
    }
}

impl fmt::Display for NormElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (m, c) in self.iter() {
            if c == 0.0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c} t^{m}")?;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// `Σ_{δ_0 <= r0, |δ_spatial| <= r} λ^{δ_0} Λ^{|δ_spatial|} t^δ`, with `+inf`
/// outside the box by convention.
pub fn frak_c(r: u32, r0: u32, lam: f64, big_lam: f64, d: usize) -> NormElement {
    let domain = Arc::new(SaturatedSet::boxed(d, r0, r));
    NormElement::from_fn(domain, |m| {
        lam.powi(m.temporal() as i32) * big_lam.powi(m.len_spatial() as i32)
    })
}

/// `c (1 - Λ X)^{-1}`.
pub fn frak_e(x: &NormElement, big_lam: f64, c: &NormElement) -> Result<NormElement> {
    if !(ext_mul(big_lam, x.constant_term()) < 1.0) {
        return Err(Error::domain("frak_e needs Lambda * X_0 < 1"));
    }
    c.mul(&x.scale(big_lam).geom_inverse(1.0)?)
}
