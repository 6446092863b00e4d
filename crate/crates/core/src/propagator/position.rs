use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use super::PropagatorSpec;
use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::lattice::Lattice;

/// Dual momenta `2πj/(L dx)` for `j ∈ (-L/2, L/2]` on one axis.
pub fn dual_axis(l: usize, dx: f64) -> Vec<f64> {
    let lo = -(((l as i64) - 1) / 2);
    (0..l as i64).map(|i| 2.0 * PI * (lo + i) as f64 / (l as f64 * dx)).collect()
}

/// All dual momenta of the spatial lattice.
pub fn dual_grid(lattice: &Lattice) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for a in 0..lattice.d {
        let axis = dual_axis(lattice.l, lattice.dx[a]);
        let mut next = Vec::with_capacity(out.len() * axis.len());
        for p in &out {
            for &k in &axis {
                let mut q = p.clone();
                q.push(k);
                next.push(q);
            }
        }
        out = next;
    }
    out
}

fn spatial_offsets(lattice: &Lattice) -> Vec<Vec<i64>> {
    (0..lattice.sites())
        .map(|mut x| {
            (0..lattice.d)
                .map(|_| {
                    let c = (x % lattice.l) as i64;
                    x /= lattice.l;
                    c
                })
                .collect()
        })
        .collect()
}

fn spatial_linear(lattice: &Lattice, coords: &[i64]) -> usize {
    coords
        .iter()
        .enumerate()
        .map(|(i, &c)| c.rem_euclid(lattice.l as i64) as usize * lattice.l.pow(i as u32))
        .sum()
}

impl PropagatorSpec {
    fn check_lattice(&self, lattice: &Lattice) -> Result<()> {
        if lattice.d != self.d || lattice.dx.iter().zip(&self.dx).any(|(a, b)| (a - b).abs() > 1e-12 * b) {
            return Err(Error::usage("momentum grid is not the dual of this lattice (dimension or spacing mismatch)"));
        }
        Ok(())
    }

    /// `C(x, x')` for `a = 0, a' = 1` as a table over time differences
    /// `τ = -(T-1)..(T-1)` and spatial offsets, by the discrete Fourier sum.
    fn c01_table(&self, lattice: &Lattice) -> Vec<Vec<Complex64>> {
        let grid = dual_grid(lattice);
        let offsets = spatial_offsets(lattice);
        let vol = lattice.spatial_volume();
        let nt = lattice.t as i64;
        ((-(nt - 1))..nt)
            .map(|tau| {
                let t = tau as f64 * lattice.dt;
                let ck: Vec<Complex64> = grid.iter().map(|k| self.c_time(t, k)).collect();
                offsets
                    .iter()
                    .map(|n| {
                        let mut s = Complex64::default();
                        for (k, c) in grid.iter().zip(&ck) {
                            let phase: f64 = k.iter().zip(n).zip(&lattice.dx).map(|((ki, &ni), h)| ki * ni as f64 * h).sum();
                            s += c * Complex64::from_polar(1.0, phase);
                        }
                        s / vol
                    })
                    .collect()
            })
            .collect()
    }

    /// The antisymmetric two-point kernel on the base space of `lattice`.
    pub fn c_position(&self, lattice: &Arc<Lattice>) -> Result<Kernel> {
        self.check_lattice(lattice)?;
        let table = self.c01_table(lattice);
        let nt = lattice.t as i64;
        let sites = lattice.sites();
        let mut out = Kernel::new(lattice.clone(), 0, 2)?;
        let coords: Vec<Vec<i64>> = spatial_offsets(lattice);
        for st in 0..lattice.spacetime_points() {
            for st2 in 0..lattice.spacetime_points() {
                let tau = (st / sites) as i64 - (st2 / sites) as i64;
                let (x, x2) = (&coords[st % sites], &coords[st2 % sites]);
                let diff: Vec<i64> = x.iter().zip(x2).map(|(a, b)| a - b).collect();
                let v = table[(tau + nt - 1) as usize][spatial_linear(lattice, &diff)];
                if v == Complex64::default() {
                    continue;
                }
                for spin in 0..2 {
                    let p = lattice.with_spin_conj(st, spin, 0);
                    let q = lattice.with_spin_conj(st2, spin, 1);
                    out.add_at(&[p, q], v)?;
                    out.add_at(&[q, p], -v)?;
                }
            }
        }
        Ok(out)
    }

    /// Continuum `C((x, a=0), (x', a'=1))` at physical displacement
    /// `(t, x⃗)`, integrating `k⃗` over the support of `U` by quadrature.
    pub fn c_continuum(&self, t: f64, x: &[f64]) -> Complex64 {
        let (lo, hi) = self.support_box();
        let nodes = self.quad.box_nodes(&lo, &hi);
        let mut s = Complex64::default();
        for (k, w) in nodes {
            let c = self.c_time(t, &k);
            if c == Complex64::default() {
                continue;
            }
            let phase: f64 = k.iter().zip(x).map(|(a, b)| a * b).sum();
            s += c * Complex64::from_polar(w, phase);
        }
        s / (2.0 * PI).powi(self.d as i32)
    }

    /// Counterterm kernel: spin, conjugation and time diagonal, spatial
    /// Fourier transform of `δe` with the `(-1)^a` phase.
    pub fn delta_e_hat(&self, lattice: &Arc<Lattice>) -> Result<Kernel> {
        self.check_lattice(lattice)?;
        let mut out = Kernel::new(lattice.clone(), 0, 2)?;
        let Some(_) = self.counterterm else { return Ok(out) };
        let grid = dual_grid(lattice);
        let offsets = spatial_offsets(lattice);
        let vol = lattice.spatial_volume();
        let de: Vec<f64> = grid.iter().map(|k| self.delta_e(k)).collect();
        let table: Vec<[Complex64; 2]> = offsets
            .iter()
            .map(|n| {
                let mut s = [Complex64::default(); 2];
                for (k, e) in grid.iter().zip(&de) {
                    let phase: f64 = k.iter().zip(n).zip(&lattice.dx).map(|((ki, &ni), h)| ki * ni as f64 * h).sum();
                    s[0] += e * Complex64::from_polar(1.0, phase);
                    s[1] += e * Complex64::from_polar(1.0, -phase);
                }
                [s[0] / (vol * lattice.dt), s[1] / (vol * lattice.dt)]
            })
            .collect();
        let sites = lattice.sites();
        let coords = spatial_offsets(lattice);
        for st in 0..lattice.spacetime_points() {
            for st2 in 0..lattice.spacetime_points() {
                if st / sites != st2 / sites {
                    continue;
                }
                let diff: Vec<i64> = coords[st % sites].iter().zip(&coords[st2 % sites]).map(|(a, b)| a - b).collect();
                let entry = &table[spatial_linear(lattice, &diff)];
                for spin in 0..2 {
                    for a in 0..2 {
                        let v = entry[a];
                        if v.norm() > 1e-15 {
                            out.add_at(&[lattice.with_spin_conj(st, spin, a), lattice.with_spin_conj(st2, spin, a)], v)?;
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}
