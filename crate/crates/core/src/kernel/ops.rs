use std::collections::HashMap;

use num_complex::Complex64;

use super::{pack, slot, unpack, Block, Key, Kernel, MAX_SLOTS};
use crate::error::{Error, Result};
use crate::perm::{factorial, signed_permutations};

impl Kernel {
    /// `(1/k!) Σ_π sgn(π) f^π` over the selected block.
    pub fn antisymmetrize(&self, which: Block) -> Kernel {
        let (start, k) = match which {
            Block::External => (0, self.m()),
            Block::Internal => (self.m(), self.n()),
        };
        let mut out = Kernel::new(self.lattice().clone(), self.m(), self.n()).expect("same arity");
        let perms = signed_permutations(k);
        let norm = 1.0 / factorial(k);
        let arity = self.arity();
        for (key, v) in self.entries() {
            let p = unpack(key, arity);
            for (pi, sign) in &perms {
                // entry f(p) contributes to f^π at q with q_{π(i)} = p_i
                let mut q = p;
                for (i, &t) in pi.iter().enumerate() {
                    q[start + t] = p[start + i];
                }
                out.add_key(pack(&q[..arity]), v * (sign * norm));
            }
        }
        match which {
            Block::External => out.set_flags(true, false),
            Block::Internal => out.set_flags(false, true),
        }
        out
    }

    /// `g(η, η'; ξ without μ, ξ' without ν) = ∫ dζ f(η; ..ζ at μ..) f'(η'; ..ζ at ν..)`.
    pub fn partial_convolution(&self, mu: usize, other: &Kernel, nu: usize) -> Result<Kernel> {
        if mu >= self.n() || nu >= other.n() {
            return Err(Error::usage("convolution slot out of range"));
        }
        if *self.lattice() != *other.lattice() {
            return Err(Error::usage("kernels live on different lattices"));
        }
        let (m, n, m2, n2) = (self.m(), self.n(), other.m(), other.n());
        let mut out = Kernel::new(self.lattice().clone(), m + m2, n + n2 - 2)?;
        let w = Complex64::new(self.lattice().cell_volume(), 0.0);
        let mut by_zeta: HashMap<usize, Vec<(Key, Complex64)>> = HashMap::new();
        for (k, v) in other.entries() {
            by_zeta.entry(slot(k, m2 + nu)).or_default().push((k, v));
        }
        for (k, v) in self.entries() {
            let zeta = slot(k, m + mu);
            let Some(partners) = by_zeta.get(&zeta) else { continue };
            let p = unpack(k, m + n);
            for &(k2, v2) in partners {
                let q = unpack(k2, m2 + n2);
                let mut pts = [0usize; MAX_SLOTS];
                let mut c = 0;
                for &x in &p[..m] {
                    pts[c] = x;
                    c += 1;
                }
                for &x in &q[..m2] {
                    pts[c] = x;
                    c += 1;
                }
                for (i, &x) in p[m..m + n].iter().enumerate() {
                    if i != mu {
                        pts[c] = x;
                        c += 1;
                    }
                }
                for (i, &x) in q[m2..m2 + n2].iter().enumerate() {
                    if i != nu {
                        pts[c] = x;
                        c += 1;
                    }
                }
                out.add_key(pack(&pts[..c]), v * v2 * w);
            }
        }
        Ok(out)
    }

    /// `∫ dζ dζ' c(ζ, ζ') f(.. ζ at i .. ζ' at j ..)` on internal slots `i ≠ j`,
    /// without sign.
    pub fn integrate_pair(&self, c: &Kernel, i: usize, j: usize) -> Result<Kernel> {
        if c.m() != 0 || c.n() != 2 {
            return Err(Error::usage("pair integration needs a two-point kernel"));
        }
        if i == j || i >= self.n() || j >= self.n() {
            return Err(Error::usage("pair integration slots invalid"));
        }
        let lat = self.lattice();
        let npts = lat.npts();
        let mut dense = vec![Complex64::default(); npts * npts];
        for (k, v) in c.entries() {
            dense[slot(k, 0) * npts + slot(k, 1)] = v;
        }
        let w = lat.cell_volume();
        let w2 = Complex64::new(w * w, 0.0);
        let (m, n) = (self.m(), self.n());
        let mut out = Kernel::new(lat.clone(), m, n - 2)?;
        for (k, v) in self.entries() {
            let p = unpack(k, m + n);
            let cv = dense[p[m + i] * npts + p[m + j]];
            if cv == Complex64::default() {
                continue;
            }
            let mut pts = [0usize; MAX_SLOTS];
            let mut cnt = 0;
            for (s, &x) in p[..m + n].iter().enumerate() {
                if s != m + i && s != m + j {
                    pts[cnt] = x;
                    cnt += 1;
                }
            }
            out.add_key(pack(&pts[..cnt]), v * cv * w2);
        }
        Ok(out)
    }

    /// Contraction with sign `(-1)^{j-i+1}`, `i < j` internal and zero based.
    pub fn contract(&self, c: &Kernel, i: usize, j: usize) -> Result<Kernel> {
        if i >= j {
            return Err(Error::usage("contraction needs i < j"));
        }
        let sign = if (j - i + 1) % 2 == 0 { 1.0 } else { -1.0 };
        let mut out = self.integrate_pair(c, i, j)?.scale(Complex64::new(sign, 0.0));
        out.set_flags(self.antisymmetric_external(), false);
        Ok(out)
    }

    /// `(f ⊗ f')(η, η'; ξ, ξ') = f(η; ξ) f'(η'; ξ')`.
    pub fn tensor(&self, other: &Kernel) -> Result<Kernel> {
        let (m, n, m2, n2) = (self.m(), self.n(), other.m(), other.n());
        let mut out = Kernel::new(self.lattice().clone(), m + m2, n + n2)?;
        for (k, v) in self.entries() {
            let p = unpack(k, m + n);
            for (k2, v2) in other.entries() {
                let q = unpack(k2, m2 + n2);
                let mut pts = Vec::with_capacity(m + m2 + n + n2);
                pts.extend_from_slice(&p[..m]);
                pts.extend_from_slice(&q[..m2]);
                pts.extend_from_slice(&p[m..m + n]);
                pts.extend_from_slice(&q[m2..m2 + n2]);
                out.add_key(pack(&pts), v * v2);
            }
        }
        Ok(out)
    }
}
