use std::sync::Arc;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;

use super::{pairs, Check, Suite};
use crate::kernel::{DecayOperator, Kernel, SeminormOptions};
use crate::lattice::Lattice;
use crate::norm::{MultiIndex, SaturatedSet};
use crate::sample;
use crate::Result;

pub const LEIBNIZ_PAIRS: usize = 100;
pub const NORM_PAIRS: usize = 50;
pub const SYMMETRY_DRAWS: usize = 100;
/// Relative slack on inequality right sides; absorbs summation order only.
pub const SLACK: f64 = 1e-12;

fn lattice() -> Arc<Lattice> {
    Arc::new(Lattice::new(1, 8, 8, 1.0, 0.5).expect("valid lattice"))
}

fn random_delta(rng: &mut impl Rng, dim: usize, max_total: u32) -> MultiIndex {
    loop {
        let v: Vec<u32> = (0..dim).map(|_| rng.gen_range(0..=max_total)).collect();
        let total: u32 = v.iter().sum();
        if total <= max_total {
            return MultiIndex(v);
        }
    }
}

/// Dense kernel on every pair of base points in a box of side `extent`.
fn dense_two_point(rng: &mut impl Rng, lat: &Arc<Lattice>, extent: usize) -> Kernel {
    let mut pts = Vec::new();
    for p in 0..lat.npts() {
        if (0..=lat.d).all(|axis| lat.coord(p, axis) < extent) {
            pts.push(p);
        }
    }
    let mut k = Kernel::new(lat.clone(), 0, 2).expect("two slots");
    for &a in &pts {
        for &b in &pts {
            k.set(&[a, b], sample::complex(rng)).expect("inside lattice");
        }
    }
    k
}

fn leibniz_case(rng: &mut impl Rng, lat: &Arc<Lattice>) -> Result<f64> {
    let n = rng.gen_range(2..=3);
    let np = rng.gen_range(2..=3);
    let f = sample::sparse_kernel(rng, lat, 0, n, 40, 4);
    let fp = sample::sparse_kernel(rng, lat, 0, np, 40, 4);
    let g = f.partial_convolution(n - 1, &fp, 0)?;
    let delta = random_delta(rng, lat.d + 1, 3);
    let i = rng.gen_range(0..n - 1);
    let j = rng.gen_range(n - 1..n + np - 2);
    let lhs = DecayOperator::single(delta.clone(), i, j).apply(&g)?;
    let mut rhs = Kernel::new(lat.clone(), 0, n + np - 2)?;
    for part in delta.lower_set() {
        let rest = delta.checked_sub(&part).expect("part is below delta");
        let df = DecayOperator::single(part.clone(), i, n - 1).apply(&f)?;
        let dfp = DecayOperator::single(rest, 0, j + 2 - n).apply(&fp)?;
        let term = df.partial_convolution(n - 1, &dfp, 0)?;
        rhs = rhs.add(&term.scale(Complex64::new(delta.binomial(&part), 0.0)))?;
    }
    let scale = lhs.max_abs().max(rhs.max_abs());
    let diff = lhs.max_abs_diff(&rhs)?;
    Ok(if scale == 0.0 { 0.0 } else { diff / scale })
}

pub fn kernel_suite(seed: u64) -> Suite {
    let mut suite = Suite::new("kernel-calculus");
    let lat = lattice();
    let dom = Arc::new(SaturatedSet::boxed(1, 2, 2));
    let opts = SeminormOptions::default();

    let mut leibniz = Check::new("leibniz_rule", 1e-12);
    let mut rng = sample::rng(seed, 0x22);
    for _ in 0..LEIBNIZ_PAIRS {
        match leibniz_case(&mut rng, &lat) {
            Ok(e) => leibniz.observe(e),
            Err(e) => leibniz.fail(e.to_string()),
        }
    }
    suite.push(leibniz);

    let mut conv = Check::new("convolution_bound", SLACK);
    let mut rng = sample::rng(seed, 0x27);
    for k in 0..NORM_PAIRS {
        let (m, mp) = [(0, 0), (1, 0), (0, 1)][k % 3];
        let n = rng.gen_range(1..=3);
        let np = rng.gen_range(1..=3);
        let f = sample::sparse_kernel(&mut rng, &lat, m, n, 30, 4);
        let fp = sample::sparse_kernel(&mut rng, &lat, mp, np, 30, 4);
        let run = || -> Result<Vec<(f64, f64)>> {
            let g = f.partial_convolution(rng_slot(k, n), &fp, rng_slot(k + 1, np))?;
            let rhs = f.seminorm_1inf(&dom, opts).mul(&fp.seminorm_1inf(&dom, opts))?;
            let mut p = pairs(&g.seminorm_1inf(&dom, opts), &rhs);
            p.push((g.norm_1inf_scalar(), f.norm_1inf_scalar() * fp.norm_1inf_scalar()));
            Ok(p)
        };
        match run() {
            Ok(p) => conv.bound(&p),
            Err(e) => conv.fail(e.to_string()),
        }
    }
    suite.push(conv);

    let mut cor = Check::new("double_contraction_bound", SLACK);
    let mut rng = sample::rng(seed, 0x28);
    for _ in 0..NORM_PAIRS {
        let n = rng.gen_range(3..=4);
        let np = rng.gen_range(3..=4);
        let f = sample::sparse_kernel(&mut rng, &lat, 0, n, 30, 2);
        let fp = sample::sparse_kernel(&mut rng, &lat, 0, np, 30, 2);
        let c2 = dense_two_point(&mut rng, &lat, 2);
        let c3 = dense_two_point(&mut rng, &lat, 2);
        let run = || -> Result<Vec<(f64, f64)>> {
            // slots after convolving ζ: (ξ2, ξ3, .., ξ2', ξ3', ..)
            let g = f.partial_convolution(0, &fp, 0)?;
            let h = g.integrate_pair(&c2, 0, n - 1)?.integrate_pair(&c3, 0, n - 2)?;
            let rhs = f
                .seminorm_1inf(&dom, opts)
                .mul(&fp.seminorm_1inf(&dom, opts))?
                .scale(c2.max_abs() * c3.max_abs());
            Ok(pairs(&h.seminorm_1inf(&dom, opts), &rhs))
        };
        match run() {
            Ok(p) => cor.bound(&p),
            Err(e) => cor.fail(e.to_string()),
        }
    }
    suite.push(cor);

    let mut sym = Check::new("seminorm_permutation_symmetry", 0.0);
    let mut rng = sample::rng(seed, 0x2a);
    for _ in 0..SYMMETRY_DRAWS {
        let n = rng.gen_range(2..=4);
        let f = sample::sparse_kernel(&mut rng, &lat, 0, n, 25, 4);
        let mut pi: Vec<usize> = (0..n).collect();
        pi.shuffle(&mut rng);
        match f.permute_internal(&pi) {
            Ok(g) => sym.expect(f.seminorm_1inf(&dom, opts) == g.seminorm_1inf(&dom, opts)),
            Err(e) => sym.fail(e.to_string()),
        }
    }
    suite.push(sym);
    suite
}

fn rng_slot(k: usize, n: usize) -> usize {
    k % n
}
