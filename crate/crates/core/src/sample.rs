//! Seeded random draws shared by the verification suites.

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::kernel::Kernel;
use crate::lattice::{BasePoint, Lattice};

/// Counter-based fan-out: every `(seed, stream)` pair gets an independent
/// generator, so adding a stream never shifts the draws of another.
pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

pub fn complex(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// Random base point whose spacetime coordinates lie in `[0, extent)` on
/// every axis.
pub fn point_in_box(rng: &mut impl Rng, lattice: &Lattice, extent: usize) -> usize {
    let time = rng.gen_range(0..extent.min(lattice.t));
    let space = (0..lattice.d).map(|_| rng.gen_range(0..extent.min(lattice.l))).collect();
    let p = BasePoint { time, space, spin: rng.gen_range(0..2), conj: rng.gen_range(0..2) };
    lattice.index(&p)
}

/// Sparse kernel with `nnz` random entries supported in a box of side `extent`.
pub fn sparse_kernel(
    rng: &mut impl Rng,
    lattice: &Arc<Lattice>,
    m: usize,
    n: usize,
    nnz: usize,
    extent: usize,
) -> Kernel {
    let mut k = Kernel::new(lattice.clone(), m, n).expect("arity within capacity");
    for _ in 0..nnz {
        let pts: Vec<usize> = (0..m + n).map(|_| point_in_box(rng, lattice, extent)).collect();
        let v = complex(rng);
        k.add_at(&pts, v).expect("points inside lattice");
    }
    k
}
