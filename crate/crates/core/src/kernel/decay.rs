use num_complex::Complex64;

use super::{pack, unpack, Kernel};
use crate::error::{Error, Result};
use crate::norm::MultiIndex;

/// One factor `(ξ_u - ξ_v)^δ`; slots are internal and zero based.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DecayFactor {
    pub delta: MultiIndex,
    pub u: usize,
    pub v: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct DecayOperator {
    pub factors: Vec<DecayFactor>,
}

impl DecayOperator {
    pub fn identity() -> Self {
        DecayOperator::default()
    }

    pub fn single(delta: MultiIndex, u: usize, v: usize) -> Self {
        DecayOperator { factors: vec![DecayFactor { delta, u, v }] }
    }

    pub fn then(mut self, delta: MultiIndex, u: usize, v: usize) -> Self {
        self.factors.push(DecayFactor { delta, u, v });
        self
    }

    /// `δ(D)`, the sum of the factor multiindices.
    pub fn total(&self, d: usize) -> MultiIndex {
        self.factors
            .iter()
            .fold(MultiIndex::zero(d), |acc, f| acc.add(&f.delta))
    }

    /// Merge factors on the same unordered pair with `u < v`; returns the
    /// canonical operator and the sign `(-1)^{|δ|}` picked up by swaps.
    pub fn canonical(&self) -> (DecayOperator, i32) {
        let mut sign = 1;
        let mut merged: std::collections::BTreeMap<(usize, usize), MultiIndex> = Default::default();
        for f in &self.factors {
            let (u, v) = if f.u < f.v {
                (f.u, f.v)
            } else {
                if f.delta.len_total() % 2 == 1 {
                    sign = -sign;
                }
                (f.v, f.u)
            };
            merged
                .entry((u, v))
                .and_modify(|e| *e = e.add(&f.delta))
                .or_insert_with(|| f.delta.clone());
        }
        let factors = merged
            .into_iter()
            .filter(|(_, delta)| !delta.is_zero())
            .map(|((u, v), delta)| DecayFactor { delta, u, v })
            .collect();
        (DecayOperator { factors }, sign)
    }

    fn check(&self, f: &Kernel) -> Result<()> {
        let d = f.lattice().d;
        for fac in &self.factors {
            if fac.u == fac.v || fac.u >= f.n() || fac.v >= f.n() {
                return Err(Error::usage(format!(
                    "decay factor slots ({}, {}) invalid for internal arity {}",
                    fac.u,
                    fac.v,
                    f.n()
                )));
            }
            if fac.delta.dim() != d {
                return Err(Error::usage("decay multiindex dimension mismatch"));
            }
        }
        Ok(())
    }

    /// Multiplication weight of an entry with base points `p` (internal block
    /// starts at `m`).
    pub fn weight(&self, f: &Kernel, p: &[usize]) -> f64 {
        let lat = f.lattice();
        let m = f.m();
        let mut w = 1.0;
        for fac in &self.factors {
            for (axis, &e) in fac.delta.0.iter().enumerate() {
                if e > 0 {
                    w *= lat.diff(p[m + fac.u], p[m + fac.v], axis).powi(e as i32);
                }
            }
        }
        w
    }

    pub fn apply(&self, f: &Kernel) -> Result<Kernel> {
        self.check(f)?;
        let mut out = Kernel::new(f.lattice().clone(), f.m(), f.n())?;
        for (k, v) in f.entries() {
            let p = unpack(k, f.arity());
            let w = self.weight(f, &p[..f.arity()]);
            out.add_key(pack(&p[..f.arity()]), v * Complex64::new(w, 0.0));
        }
        Ok(out)
    }
}

/// Every canonical decay operator on `n` slots with `δ(D) = δ`: one total
/// multiindex per unordered pair, obtained by distributing each component of
/// `δ` over the pairs.
pub fn decay_operators(n: usize, delta: &MultiIndex) -> Vec<DecayOperator> {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| ((u + 1)..n).map(move |v| (u, v)))
        .collect();
    if delta.is_zero() {
        return vec![DecayOperator::identity()];
    }
    if pairs.is_empty() {
        return Vec::new();
    }
    let dim = delta.0.len();
    // per axis: all compositions of δ_axis into |pairs| parts
    let per_axis: Vec<Vec<Vec<u32>>> = delta.0.iter().map(|&e| compositions(e, pairs.len())).collect();
    let mut out = Vec::new();
    let mut choice = vec![0usize; dim];
    loop {
        let factors = pairs
            .iter()
            .enumerate()
            .filter_map(|(pi, &(u, v))| {
                let delta = MultiIndex((0..dim).map(|a| per_axis[a][choice[a]][pi]).collect());
                (!delta.is_zero()).then_some(DecayFactor { delta, u, v })
            })
            .collect();
        out.push(DecayOperator { factors });
        let mut a = 0;
        loop {
            if a == dim {
                return out;
            }
            choice[a] += 1;
            if choice[a] < per_axis[a].len() {
                break;
            }
            choice[a] = 0;
            a += 1;
        }
    }
}

/// Weak compositions of `total` into `parts` nonnegative parts.
fn compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}
