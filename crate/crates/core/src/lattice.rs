//! Finite periodic spacetime lattice and the base space of field arguments.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};

/// Periodic lattice with `t` time slices and `l^d` spatial sites, two spins
/// and two conjugation indices per site.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    pub d: usize,
    pub l: usize,
    pub t: usize,
    pub dx: Vec<f64>,
    pub dt: f64,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasePoint {
    pub time: usize,
    pub space: Vec<usize>,
    pub spin: usize,
    pub conj: usize,
}

impl Lattice {
    pub fn new(d: usize, l: usize, t: usize, dx: f64, dt: f64) -> Result<Self> {
        Lattice::with_spacings(d, l, t, vec![dx; d], dt)
    }

    pub fn with_spacings(d: usize, l: usize, t: usize, dx: Vec<f64>, dt: f64) -> Result<Self> {
        if l == 0 || t == 0 {
            return Err(Error::usage("lattice extents must be positive"));
        }
        if dx.len() != d {
            return Err(Error::usage("one spatial spacing per axis"));
        }
        if !(dt > 0.0) || dx.iter().any(|h| !(*h > 0.0)) {
            return Err(Error::usage("lattice spacings must be positive"));
        }
        if npts_of(d, l, t) > u16::MAX as usize {
            return Err(Error::Capacity("lattice has more than 65535 base points".into()));
        }
        Ok(Lattice { d, l, t, dx, dt })
    }

    pub fn sites(&self) -> usize {
        self.l.pow(self.d as u32)
    }

    pub fn spacetime_points(&self) -> usize {
        self.t * self.sites()
    }

    /// Number of base points: spacetime points × spin × conjugation.
    pub fn npts(&self) -> usize {
        npts_of(self.d, self.l, self.t)
    }

    pub fn cell_volume(&self) -> f64 {
        self.dt * self.dx.iter().product::<f64>()
    }

    pub fn spatial_volume(&self) -> f64 {
        self.sites() as f64 * self.dx.iter().product::<f64>()
    }

    pub fn index(&self, p: &BasePoint) -> usize {
        let mut xlin = 0;
        for (i, &x) in p.space.iter().enumerate() {
            xlin += x * self.l.pow(i as u32);
        }
        ((p.time * self.sites() + xlin) * 2 + p.spin) * 2 + p.conj
    }

    pub fn point(&self, idx: usize) -> BasePoint {
        let conj = idx % 2;
        let spin = (idx / 2) % 2;
        let st = idx / 4;
        let time = st / self.sites();
        let mut xlin = st % self.sites();
        let mut space = Vec::with_capacity(self.d);
        for _ in 0..self.d {
            space.push(xlin % self.l);
            xlin /= self.l;
        }
        BasePoint { time, space, spin, conj }
    }

    /// Spacetime index `t * sites + xlin` of a base point index.
    pub fn spacetime_of(&self, idx: usize) -> usize {
        idx / 4
    }

    pub fn spin_of(&self, idx: usize) -> usize {
        (idx / 2) % 2
    }

    pub fn conj_of(&self, idx: usize) -> usize {
        idx % 2
    }

    pub fn with_spin_conj(&self, spacetime: usize, spin: usize, conj: usize) -> usize {
        (spacetime * 2 + spin) * 2 + conj
    }

    /// Integer coordinate of a base point along `axis` (0 temporal).
    pub fn coord(&self, idx: usize, axis: usize) -> usize {
        let st = idx / 4;
        if axis == 0 {
            st / self.sites()
        } else {
            (st % self.sites()) / self.l.pow(axis as u32 - 1) % self.l
        }
    }

    pub fn period(&self, axis: usize) -> usize {
        if axis == 0 {
            self.t
        } else {
            self.l
        }
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        if axis == 0 {
            self.dt
        } else {
            self.dx[axis - 1]
        }
    }

    /// Minimal-image integer difference in `(-P/2, P/2]`.
    pub fn min_image(&self, diff: i64, axis: usize) -> i64 {
        let p = self.period(axis) as i64;
        let mut r = diff.rem_euclid(p);
        if 2 * r > p {
            r -= p;
        }
        r
    }

    /// Physical minimal-image difference `ξ_axis - ξ'_axis`.
    pub fn diff(&self, a: usize, b: usize, axis: usize) -> f64 {
        let raw = self.coord(a, axis) as i64 - self.coord(b, axis) as i64;
        self.min_image(raw, axis) as f64 * self.spacing(axis)
    }

    /// Translate a base point by integer shifts per axis (spin and conjugation kept).
    pub fn translate(&self, idx: usize, shift: &[i64]) -> usize {
        let mut p = self.point(idx);
        let wrap = |c: usize, s: i64, per: usize| (c as i64 + s).rem_euclid(per as i64) as usize;
        p.time = wrap(p.time, shift[0], self.t);
        for i in 0..self.d {
            p.space[i] = wrap(p.space[i], shift[i + 1], self.l);
        }
        self.index(&p)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "d": self.d,
            "L": self.l,
            "T": self.t,
            "dx": self.dx.iter().map(|h| crate::report::real_value(*h)).collect::<Vec<_>>(),
            "dt": crate::report::real_value(self.dt),
        })
    }
}

fn npts_of(d: usize, l: usize, t: usize) -> usize {
    t.saturating_mul(l.saturating_pow(d as u32)).saturating_mul(4)
}
