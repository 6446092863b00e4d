use super::*;
use crate::norm::MultiIndex;
use crate::sample;
use proptest::prelude::*;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn lat(l: usize, t: usize) -> Arc<Lattice> {
    Arc::new(Lattice::new(1, l, t, 0.5, 0.25).unwrap())
}

fn constant_two_point(lattice: &Arc<Lattice>, value: f64) -> Kernel {
    let mut k = Kernel::new(lattice.clone(), 0, 2).unwrap();
    for a in 0..lattice.npts() {
        for b in 0..lattice.npts() {
            k.set(&[a, b], c(value)).unwrap();
        }
    }
    k
}

fn box_domain(r0: u32, r: u32) -> Arc<SaturatedSet> {
    Arc::new(SaturatedSet::boxed(1, r0, r))
}

use crate::norm::SaturatedSet;

#[test]
fn decay_on_constant_kernel() {
    let lattice = lat(4, 4);
    let f = constant_two_point(&lattice, 1.0);
    let op = DecayOperator::single(MultiIndex(vec![1, 0]), 0, 1);
    let g = op.apply(&f).unwrap();
    for (k, v) in g.entries() {
        let (a, b) = (slot(k, 0), slot(k, 1));
        assert_eq!(v, c(lattice.diff(a, b, 0)));
    }
    let both = DecayOperator::single(MultiIndex(vec![1, 0]), 0, 1).then(MultiIndex(vec![0, 1]), 0, 1);
    let h = both.apply(&f).unwrap();
    for (k, v) in h.entries() {
        let (a, b) = (slot(k, 0), slot(k, 1));
        assert_eq!(v, c(lattice.diff(a, b, 0) * lattice.diff(a, b, 1)));
    }
    assert!(DecayOperator::single(MultiIndex(vec![1, 0]), 0, 2).apply(&f).is_err());
}

#[test]
fn swapped_pair_sign() {
    let lattice = lat(6, 6);
    let mut rng = sample::rng(3, 0);
    let f = sample::sparse_kernel(&mut rng, &lattice, 0, 3, 40, 3);
    for delta in [MultiIndex(vec![1, 0]), MultiIndex(vec![1, 1]), MultiIndex(vec![2, 1])] {
        let sign = if delta.len_total() % 2 == 0 { 1.0 } else { -1.0 };
        let a = DecayOperator::single(delta.clone(), 1, 2).apply(&f).unwrap();
        let b = DecayOperator::single(delta, 2, 1).apply(&f).unwrap();
        assert!(a.sub(&b.scale(c(sign))).unwrap().max_abs() < 1e-12);
    }
}

#[test]
fn factor_order_irrelevant() {
    let lattice = lat(6, 6);
    let mut rng = sample::rng(4, 0);
    let f = sample::sparse_kernel(&mut rng, &lattice, 0, 3, 40, 3);
    let x = DecayOperator::single(MultiIndex(vec![1, 0]), 0, 1)
        .then(MultiIndex(vec![0, 2]), 1, 2)
        .then(MultiIndex(vec![1, 1]), 0, 2);
    let y = DecayOperator::single(MultiIndex(vec![1, 1]), 0, 2)
        .then(MultiIndex(vec![1, 0]), 0, 1)
        .then(MultiIndex(vec![0, 2]), 1, 2);
    assert_eq!(x.apply(&f).unwrap(), y.apply(&f).unwrap());
}

#[test]
fn scalar_norm_examples() {
    let lattice = lat(4, 4);
    let delta = Kernel::delta(lattice.clone());
    assert!((delta.norm_1inf_scalar() - 1.0).abs() < 1e-14);

    let mut one = Kernel::new(lattice.clone(), 0, 1).unwrap();
    for p in 0..lattice.npts() {
        one.set(&[p], c(-2.5)).unwrap();
    }
    assert_eq!(one.norm_1inf_scalar(), 2.5);

    // m = 1, n = 1: sup over the external point of the internal integral
    let mut k = Kernel::new(lattice.clone(), 1, 1).unwrap();
    k.set(&[0, 1], c(1.0)).unwrap();
    k.set(&[0, 2], c(2.0)).unwrap();
    k.set(&[3, 1], c(4.0)).unwrap();
    let w = lattice.cell_volume();
    assert!((k.norm_1inf_scalar() - 4.0 * w).abs() < 1e-15);
    // the m = 0 reading of the same data pins either slot
    let k0 = k.as_internal();
    assert!((k0.norm_1inf_scalar() - 5.0 * w).abs() < 1e-15);
}

#[test]
fn seminorm_examples() {
    let lattice = lat(4, 4);
    let dom = box_domain(2, 2);
    let mut k = Kernel::new(lattice.clone(), 1, 1).unwrap();
    k.set(&[0, 5], c(3.0)).unwrap();
    let s = k.seminorm_1inf(&dom, SeminormOptions::default());
    assert!(s.constant_term() > 0.0);
    assert!(s.coeffs()[1..].iter().all(|&x| x == 0.0));

    let d = Kernel::delta(lattice.clone()).seminorm_1inf(&dom, SeminormOptions::default());
    assert!((d.constant_term() - 1.0).abs() < 1e-14);
    assert!(d.coeffs()[1..].iter().all(|&x| x == 0.0));

    let zero = Kernel::new(lattice, 0, 0).unwrap();
    assert_eq!(zero.seminorm_1inf(&dom, SeminormOptions::default()), NormElement::zero(dom));
}

use crate::norm::NormElement;

#[test]
fn exponential_two_point_matches_direct_oracle() {
    let lattice = lat(6, 6);
    let dom = Arc::new(SaturatedSet::total_degree(1, 3));
    let mut f = Kernel::new(lattice.clone(), 0, 2).unwrap();
    for a in 0..lattice.npts() {
        for b in 0..lattice.npts() {
            let r = lattice.diff(a, b, 0).abs() + lattice.diff(a, b, 1).abs();
            f.set(&[a, b], c((-r).exp())).unwrap();
        }
    }
    let s = f.seminorm_1inf(&dom, SeminormOptions::default());
    let w = lattice.cell_volume();
    let npts = lattice.npts();
    for delta in dom.members() {
        let mut best: f64 = 0.0;
        for pin in 0..2 {
            for a in 0..npts {
                let mut acc = 0.0;
                for b in 0..npts {
                    let (x, y) = if pin == 0 { (a, b) } else { (b, a) };
                    let mut weight = f.get(&[x, y]).norm();
                    for axis in 0..2 {
                        weight *= lattice.diff(x, y, axis).powi(delta.0[axis] as i32);
                    }
                    acc += weight.abs();
                }
                best = best.max(acc * w);
            }
        }
        let expect = best / delta.factorial();
        assert!((s.get(delta) - expect).abs() <= 1e-12 * expect.max(1.0), "{delta}");
    }
}

#[test]
fn coefficients_beyond_cap_are_infinite() {
    let lattice = lat(4, 4);
    let mut rng = sample::rng(5, 0);
    let f = sample::sparse_kernel(&mut rng, &lattice, 0, 2, 10, 2);
    let dom = Arc::new(SaturatedSet::total_degree(1, 3));
    let s = f.seminorm_1inf(&dom, SeminormOptions { delta_max: 2 });
    assert!(s.get(&MultiIndex(vec![3, 0])).is_infinite());
    assert!(s.get(&MultiIndex(vec![1, 1])).is_finite());
}

#[test]
fn antisymmetrize_examples() {
    let lattice = lat(4, 4);
    let mut rng = sample::rng(6, 0);
    let f = sample::sparse_kernel(&mut rng, &lattice, 2, 1, 30, 4);
    let g = f.antisymmetrize(Block::External);
    assert!(g.antisymmetric_external());
    for (k, v) in g.entries() {
        let (a, b, x) = (slot(k, 0), slot(k, 1), slot(k, 2));
        let expect = (f.get(&[a, b, x]) - f.get(&[b, a, x])) * 0.5;
        assert!((v - expect).norm() < 1e-15);
    }
    let gg = g.antisymmetrize(Block::External);
    assert!(gg.sub(&g).unwrap().max_abs() < 1e-15);

    let sym = constant_two_point(&lattice, 1.0);
    assert!(sym.antisymmetrize(Block::Internal).is_empty());
}

#[test]
fn convolution_examples() {
    let lattice = lat(3, 2);
    let delta = Kernel::delta(lattice.clone());
    let dd = delta.partial_convolution(1, &delta, 0).unwrap();
    assert!(dd.sub(&delta).unwrap().max_abs() < 1e-12);

    let mut rng = sample::rng(7, 0);
    let f = sample::sparse_kernel(&mut rng, &lattice, 0, 2, 60, 3);
    let g = sample::sparse_kernel(&mut rng, &lattice, 0, 2, 60, 3);
    let h = f.partial_convolution(1, &g, 0).unwrap();
    let npts = lattice.npts();
    let w = lattice.cell_volume();
    for a in 0..npts {
        for b in 0..npts {
            let mut expect = Complex64::default();
            for z in 0..npts {
                expect += f.get(&[a, z]) * g.get(&[z, b]);
            }
            assert!((h.get(&[a, b]) - expect * w).norm() < 1e-12);
        }
    }
    assert!(f.partial_convolution(2, &g, 0).is_err());
}

#[test]
fn contraction_examples() {
    let lattice = lat(3, 2);
    let mut rng = sample::rng(8, 0);
    let f = sample::sparse_kernel(&mut rng, &lattice, 0, 2, 40, 3);
    let cc = sample::sparse_kernel(&mut rng, &lattice, 0, 2, 40, 3).antisymmetrize(Block::Internal);
    let s = f.contract(&cc, 0, 1).unwrap();
    assert_eq!(s.arity(), 0);
    let w = lattice.cell_volume();
    let mut expect = Complex64::default();
    for (k, v) in f.entries() {
        expect += v * cc.get(&[slot(k, 0), slot(k, 1)]) * w * w;
    }
    assert!((s.get(&[]) - expect).norm() < 1e-13);
    assert!(f.contract(&cc, 1, 1).is_err());

    // i = 0, j = 2 has sign (-1)^3
    let f3 = sample::sparse_kernel(&mut rng, &lattice, 0, 3, 40, 3);
    let a = f3.contract(&cc, 0, 2).unwrap();
    let b = f3.integrate_pair(&cc, 0, 2).unwrap();
    assert!(a.add(&b).unwrap().max_abs() < 1e-15);
}

#[test]
fn contraction_commutes_with_external_antisymmetrization() {
    let lattice = lat(3, 2);
    let mut rng = sample::rng(9, 0);
    let f = sample::sparse_kernel(&mut rng, &lattice, 1, 2, 12, 3);
    let g = sample::sparse_kernel(&mut rng, &lattice, 1, 2, 12, 3);
    let cc = sample::sparse_kernel(&mut rng, &lattice, 0, 2, 30, 3).antisymmetrize(Block::Internal);
    let t = f.tensor(&g).unwrap();
    let lhs = t.antisymmetrize(Block::External).contract(&cc, 1, 2).unwrap();
    let rhs = t.contract(&cc, 1, 2).unwrap().antisymmetrize(Block::External);
    assert!(lhs.sub(&rhs).unwrap().max_abs() < 1e-13);
}

#[test]
fn norm_sup_examples() {
    let lattice = lat(4, 4);
    let dom = box_domain(1, 1);
    let zero = Kernel::new(lattice.clone(), 0, 2).unwrap();
    assert_eq!(zero.norm_sup(&dom), NormElement::zero(dom.clone()));
    let s = Kernel::delta(lattice.clone()).norm_sup(&dom);
    assert!((s.constant_term() - 1.0 / lattice.cell_volume()).abs() < 1e-12);
    assert!(s.coeffs()[1..].iter().all(|&x| x == 0.0));
}

#[test]
fn json_lists_entries() {
    let lattice = lat(2, 2);
    let mut k = Kernel::new(lattice, 0, 2).unwrap();
    k.set(&[1, 2], Complex64::new(0.5, -1.0)).unwrap();
    let v = k.to_json();
    assert_eq!(v["entries"][0][0], serde_json::json!([1, 2]));
    assert_eq!(v["n"], 2);
}

fn leq_rel(a: &NormElement, b: &NormElement, rel: f64) -> bool {
    a.iter().zip(b.coeffs()).all(|((_, x), &y)| x <= y + rel * y.abs())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn seminorm_is_permutation_symmetric(seed in any::<u64>(), pi in Just(vec![2usize, 0, 1]).prop_shuffle()) {
        let lattice = lat(8, 8);
        let mut rng = sample::rng(seed, 1);
        let f = sample::sparse_kernel(&mut rng, &lattice, 0, 3, 25, 4);
        let dom = box_domain(2, 2);
        let a = f.seminorm_1inf(&dom, SeminormOptions::default());
        let b = f.permute_internal(&pi).unwrap().seminorm_1inf(&dom, SeminormOptions::default());
        prop_assert_eq!(a, b);
    }

    #[test]
    fn seminorm_is_translation_invariant(seed in any::<u64>(), s0 in -8i64..8, s1 in -8i64..8) {
        let lattice = lat(6, 6);
        let mut rng = sample::rng(seed, 2);
        let f = sample::sparse_kernel(&mut rng, &lattice, 0, 2, 25, 6);
        let g = f.map_points(|p| lattice.translate(p, &[s0, s1]));
        let dom = box_domain(2, 2);
        let a = f.seminorm_1inf(&dom, SeminormOptions::default());
        let b = g.seminorm_1inf(&dom, SeminormOptions::default());
        for ((_, x), &y) in a.iter().zip(b.coeffs()) {
            prop_assert!((x - y).abs() <= 1e-12 * x.max(1.0));
        }
    }

    #[test]
    fn antisymmetrization_does_not_increase_seminorm(seed in any::<u64>()) {
        let lattice = lat(8, 8);
        let mut rng = sample::rng(seed, 3);
        let f = sample::sparse_kernel(&mut rng, &lattice, 0, 3, 20, 4);
        let dom = box_domain(1, 2);
        let a = f.antisymmetrize(Block::Internal).seminorm_1inf(&dom, SeminormOptions::default());
        let b = f.seminorm_1inf(&dom, SeminormOptions::default());
        prop_assert!(leq_rel(&a, &b, 1e-12));
    }

    #[test]
    fn convolution_norm_is_submultiplicative(seed in any::<u64>(), m2 in 0usize..2) {
        let lattice = lat(8, 8);
        let mut rng = sample::rng(seed, 4);
        let f = sample::sparse_kernel(&mut rng, &lattice, 0, 3, 15, 4);
        let g = sample::sparse_kernel(&mut rng, &lattice, m2, 2, 15, 4);
        let h = f.partial_convolution(1, &g, 0).unwrap();
        let dom = box_domain(2, 1);
        let o = SeminormOptions::default();
        prop_assert!(h.norm_1inf_scalar() <= f.norm_1inf_scalar() * g.norm_1inf_scalar() * (1.0 + 1e-12));
        let rhs = f.seminorm_1inf(&dom, o).mul(&g.seminorm_1inf(&dom, o)).unwrap();
        prop_assert!(leq_rel(&h.seminorm_1inf(&dom, o), &rhs, 1e-12));
    }
}
