//! Sparse kernels on `B^m × B^n` over a finite lattice base space.
//!
//! An entry key packs the `m + n` base point indices, 16 bits per slot,
//! external slots first. Integrals over `B` are weighted sums with weight
//! equal to the lattice cell volume on every base point.

mod decay;
mod norms;
mod ops;

pub use decay::{decay_operators, DecayFactor, DecayOperator};
pub use norms::SeminormOptions;

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::lattice::Lattice;

pub const MAX_SLOTS: usize = 8;

pub type Key = u128;

#[inline]
pub fn pack(points: &[usize]) -> Key {
    let mut k: Key = 0;
    for (s, &p) in points.iter().enumerate() {
        k |= (p as Key) << (16 * s);
    }
    k
}

#[inline]
pub fn slot(key: Key, s: usize) -> usize {
    ((key >> (16 * s)) & 0xffff) as usize
}

#[inline]
pub fn unpack(key: Key, arity: usize) -> [usize; MAX_SLOTS] {
    let mut out = [0; MAX_SLOTS];
    for (s, o) in out.iter_mut().enumerate().take(arity) {
        *o = slot(key, s);
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Block {
    External,
    Internal,
}

#[derive(Clone, Debug)]
pub struct Kernel {
    lattice: Arc<Lattice>,
    m: usize,
    n: usize,
    entries: BTreeMap<Key, Complex64>,
    ant_ext: bool,
    ant_int: bool,
}

impl PartialEq for Kernel {
    fn eq(&self, other: &Self) -> bool {
        self.lattice == other.lattice
            && self.m == other.m
            && self.n == other.n
            && self.entries == other.entries
    }
}

impl Kernel {
    pub fn new(lattice: Arc<Lattice>, m: usize, n: usize) -> Result<Self> {
        if m + n > MAX_SLOTS {
            return Err(Error::Capacity(format!("kernel arity {} exceeds {MAX_SLOTS}", m + n)));
        }
        Ok(Kernel { lattice, m, n, entries: BTreeMap::new(), ant_ext: m <= 1, ant_int: n <= 1 })
    }

    pub fn lattice(&self) -> &Arc<Lattice> {
        &self.lattice
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn arity(&self) -> usize {
        self.m + self.n
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn antisymmetric_external(&self) -> bool {
        self.ant_ext
    }

    pub fn antisymmetric_internal(&self) -> bool {
        self.ant_int
    }

    pub(crate) fn set_flags(&mut self, ant_ext: bool, ant_int: bool) {
        self.ant_ext = ant_ext || self.m <= 1;
        self.ant_int = ant_int || self.n <= 1;
    }

    pub fn entries(&self) -> impl Iterator<Item = (Key, Complex64)> + '_ {
        self.entries.iter().map(|(k, v)| (*k, *v))
    }

    fn check_points(&self, points: &[usize]) -> Result<()> {
        if points.len() != self.arity() {
            return Err(Error::usage(format!(
                "expected {} base points, got {}",
                self.arity(),
                points.len()
            )));
        }
        if points.iter().any(|&p| p >= self.lattice.npts()) {
            return Err(Error::usage("base point index outside the lattice"));
        }
        Ok(())
    }

    pub fn get(&self, points: &[usize]) -> Complex64 {
        self.entries.get(&pack(points)).copied().unwrap_or_default()
    }

    pub fn get_key(&self, key: Key) -> Complex64 {
        self.entries.get(&key).copied().unwrap_or_default()
    }

    pub fn set(&mut self, points: &[usize], value: Complex64) -> Result<()> {
        self.check_points(points)?;
        self.set_key(pack(points), value);
        Ok(())
    }

    pub fn add_at(&mut self, points: &[usize], value: Complex64) -> Result<()> {
        self.check_points(points)?;
        self.add_key(pack(points), value);
        Ok(())
    }

    pub(crate) fn set_key(&mut self, key: Key, value: Complex64) {
        if value == Complex64::new(0.0, 0.0) {
            self.entries.remove(&key);
        } else {
            self.entries.insert(key, value);
        }
        self.ant_ext = self.m <= 1;
        self.ant_int = self.n <= 1;
    }

    pub(crate) fn add_key(&mut self, key: Key, value: Complex64) {
        let slot = self.entries.entry(key).or_default();
        *slot += value;
        if *slot == Complex64::new(0.0, 0.0) {
            self.entries.remove(&key);
        }
        self.ant_ext = self.m <= 1;
        self.ant_int = self.n <= 1;
    }

    pub fn scale(&self, s: Complex64) -> Kernel {
        let mut out = self.clone();
        if s == Complex64::new(0.0, 0.0) {
            out.entries.clear();
        } else {
            for v in out.entries.values_mut() {
                *v *= s;
            }
        }
        out
    }

    pub fn add(&self, other: &Kernel) -> Result<Kernel> {
        self.check_same_shape(other)?;
        let mut out = self.clone();
        for (k, v) in other.entries() {
            out.add_key(k, v);
        }
        out.set_flags(self.ant_ext && other.ant_ext, self.ant_int && other.ant_int);
        Ok(out)
    }

    pub fn sub(&self, other: &Kernel) -> Result<Kernel> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn check_same_shape(&self, other: &Kernel) -> Result<()> {
        if self.m != other.m || self.n != other.n || *self.lattice != *other.lattice {
            return Err(Error::usage("kernels differ in arity or lattice"));
        }
        Ok(())
    }

    /// Drop entries with `|v| <= tol`.
    pub fn pruned(&self, tol: f64) -> Kernel {
        let mut out = self.clone();
        out.entries.retain(|_, v| v.norm() > tol);
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.values().fold(0.0, |a, v| a.max(v.norm()))
    }

    /// `max |self - other|` over all entries.
    pub fn max_abs_diff(&self, other: &Kernel) -> Result<f64> {
        Ok(self.sub(other)?.max_abs())
    }

    /// Reinterpret all slots as internal.
    pub fn as_internal(&self) -> Kernel {
        let mut out = self.clone();
        out.n += out.m;
        out.m = 0;
        out.set_flags(false, false);
        out
    }

    /// `f^π(ξ_1..ξ_n) = f(ξ_{π(1)}..ξ_{π(n)})` on the internal block.
    pub fn permute_internal(&self, pi: &[usize]) -> Result<Kernel> {
        if pi.len() != self.n {
            return Err(Error::usage("permutation length must equal internal arity"));
        }
        let mut out = Kernel::new(self.lattice.clone(), self.m, self.n)?;
        for (k, v) in self.entries() {
            let p = unpack(k, self.arity());
            let mut q = p;
            for (i, &target) in pi.iter().enumerate() {
                q[self.m + target] = p[self.m + i];
            }
            out.add_key(pack(&q[..self.arity()]), v);
        }
        out.set_flags(self.ant_ext, self.ant_int);
        Ok(out)
    }

    /// Apply a map to every base point of every entry.
    pub fn map_points(&self, f: impl Fn(usize) -> usize) -> Kernel {
        let mut out = self.clone();
        out.entries.clear();
        for (k, v) in self.entries() {
            let p = unpack(k, self.arity());
            let q: Vec<usize> = p[..self.arity()].iter().map(|&x| f(x)).collect();
            out.entries.insert(pack(&q), v);
        }
        out
    }

    /// Lattice delta on `B × B`: `1/cell_volume` on the diagonal.
    pub fn delta(lattice: Arc<Lattice>) -> Kernel {
        let w = 1.0 / lattice.cell_volume();
        let mut out = Kernel::new(lattice.clone(), 0, 2).expect("two slots");
        for p in 0..lattice.npts() {
            out.entries.insert(pack(&[p, p]), Complex64::new(w, 0.0));
        }
        out
    }

    pub fn to_json(&self) -> Value {
        use crate::report::real_value;
        let entries: Vec<Value> = self
            .entries()
            .map(|(k, v)| {
                let p = unpack(k, self.arity());
                json!([p[..self.arity()].to_vec(), real_value(v.re), real_value(v.im)])
            })
            .collect();
        json!({
            "m": self.m,
            "n": self.n,
            "lattice": self.lattice.to_json(),
            "entries": entries,
        })
    }
}

#[cfg(test)]
mod tests;
