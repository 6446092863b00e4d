use std::sync::Arc;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

use super::*;
use crate::kernel::{Block, Kernel, SeminormOptions};
use crate::lattice::Lattice;
use crate::norm::{NormElement, SaturatedSet};
use crate::sample;

type E = ExactElement;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn one() -> Complex64 {
    c(1.0, 0.0)
}

fn gen(n_gen: usize, n_ext: usize, i: usize) -> E {
    E::generator(n_gen, n_ext, i).unwrap()
}

fn random_cov(n: usize, seed: u64, scale: f64) -> CovarianceMatrix {
    let mut rng = sample::rng(seed, 1);
    let vals: Vec<Complex64> = (0..n * n).map(|_| sample::complex(&mut rng) * scale).collect();
    CovarianceMatrix::from_upper(n, |i, j| vals[i * n + j])
}

/// Random element with roughly `density` of all monomials populated.
fn random_element(n_gen: usize, n_ext: usize, seed: u64, even: bool, body: bool, scale: f64) -> E {
    let mut rng = sample::rng(seed, 2);
    let mut f = E::zero(n_gen, n_ext).unwrap();
    for bits in 0u64..(1u64 << n_gen) {
        if even && bits.count_ones() % 2 == 1 {
            continue;
        }
        if bits == 0 && !body {
            continue;
        }
        if rng.gen_bool(0.4) {
            f.add_term(bits, sample::complex(&mut rng) * scale);
        }
    }
    f
}

fn assert_close(a: &E, b: &E, tol: f64) {
    let diff = a.max_abs_diff(b).unwrap();
    let scale = a.max_abs().max(b.max_abs()).max(1.0);
    assert!(diff <= tol * scale, "difference {diff:e}\n{}\nvs\n{}", a.dump(), b.dump());
}

#[test]
fn product_examples() {
    let p = gen(3, 0, 1).mul(&gen(3, 0, 2)).unwrap();
    assert_eq!(p.get(0b110), one());
    assert!(gen(3, 0, 1).mul(&gen(3, 0, 1)).unwrap().is_empty());
    let q = gen(3, 0, 2).mul(&gen(3, 0, 1)).unwrap();
    assert_eq!(q.get(0b110), -one());
    assert!(gen(3, 0, 0).mul(&E::generator(4, 0, 1).unwrap()).is_err());
    assert_eq!(merge_sign(0b100, 0b011), 1.0);
    assert_eq!(merge_sign(0b010, 0b001), -1.0);
    assert_eq!(merge_sign(0b101, 0b010), -1.0);
}

#[test]
fn monomial_word_signs() {
    let m = E::monomial(4, 0, &[3, 0, 2], one()).unwrap();
    // ψ3 ψ0 ψ2 = ψ0 ψ2 ψ3 after an even number of swaps
    assert_eq!(m.get(0b1101), one());
    let rep = E::monomial(4, 0, &[1, 1], one()).unwrap();
    assert!(rep.is_empty());
}

#[test]
fn capacity_limits() {
    assert!(E::zero(23, 0).is_err());
    assert!(E::zero(22, 0).is_ok());
    assert!(Grassmann::<LamPoly<3>>::zero(64, 0).is_ok());
    assert!(Grassmann::<LamPoly<3>>::zero(65, 0).is_err());
}

#[test]
fn exp_log_examples() {
    let z = E::zero(4, 0).unwrap();
    assert_eq!(z.exp().unwrap(), E::one(4, 0).unwrap());
    let a = c(0.3, -0.7);
    let x = E::monomial(4, 0, &[0, 1], a).unwrap();
    let e = x.exp().unwrap();
    assert_eq!(e, E::one(4, 0).unwrap().add(&x).unwrap());
    assert!(z.log().is_err());
}

#[test]
fn log_inverts_exp() {
    for seed in 0..5 {
        let f = random_element(6, 2, seed, true, true, 0.3);
        let back = f.exp().unwrap().log().unwrap();
        assert_close(&back, &f, 1e-12);
    }
}

#[test]
fn gaussian_examples() {
    let cv = c(0.4, 0.1);
    let cov = CovarianceMatrix::from_upper(3, |i, j| if (i, j) == (0, 1) { cv } else { c(0.2 * j as f64, 0.0) });
    let f = E::monomial(3, 0, &[0, 1], one()).unwrap();
    assert_eq!(gaussian_integral(&f, &cov).unwrap().body(), cv);
    assert_eq!(gaussian_integral(&E::one(3, 0).unwrap(), &cov).unwrap().body(), one());
    let odd = E::monomial(3, 0, &[0, 1, 2], one()).unwrap();
    assert!(gaussian_integral(&odd, &cov).unwrap().is_empty());
    // externals survive
    let g = E::monomial(3, 1, &[0, 1, 2], one()).unwrap();
    let cov2 = CovarianceMatrix::from_upper(2, |_, _| cv);
    let r = gaussian_integral(&g, &cov2).unwrap();
    assert_eq!(r.get(0b001), cv);
}

#[test]
fn four_point_moment_is_pairing_sum() {
    let cov = random_cov(4, 7, 1.0);
    let f = E::monomial(4, 0, &[0, 1, 2, 3], one()).unwrap();
    let m = gaussian_integral(&f, &cov).unwrap().body();
    let g = |i, j| cov.get(i, j);
    let want = g(0, 1) * g(2, 3) - g(0, 2) * g(1, 3) + g(0, 3) * g(1, 2);
    assert!((m - want).norm() < 1e-12);
}

#[test]
fn shift_convolve_examples() {
    let cov = random_cov(3, 11, 1.0);
    let f = E::monomial(3, 0, &[0, 1], one()).unwrap();
    let got = shift_convolve(&f, &cov).unwrap();
    let mut want = f.clone();
    want.add_term(0, cov.get(0, 1));
    assert_close(&got, &want, 1e-15);
    assert_close(&shift_convolve_doubled(&f, &cov).unwrap(), &want, 1e-15);
    let ext = E::monomial(5, 2, &[0, 1], c(2.0, 1.0)).unwrap();
    assert_eq!(shift_convolve(&ext, &cov).unwrap(), ext);
}

#[test]
fn both_convolution_paths_agree() {
    for seed in 0..6 {
        let (n_gen, n_ext) = [(6, 0), (8, 2), (10, 3)][seed as usize % 3];
        let f = random_element(n_gen, n_ext, seed, false, true, 1.0);
        let cov = random_cov(n_gen - n_ext, seed + 50, 0.7);
        let fast = shift_convolve(&f, &cov).unwrap();
        let slow = shift_convolve_doubled(&f, &cov).unwrap();
        assert_close(&fast, &slow, 1e-12);
    }
}

#[test]
fn convolution_composes() {
    let f = random_element(8, 2, 3, false, true, 1.0);
    let c1 = random_cov(6, 1, 0.5);
    let c2 = random_cov(6, 2, 0.5);
    let two = shift_convolve_doubled(&shift_convolve_doubled(&f, &c1).unwrap(), &c2).unwrap();
    let sum = shift_convolve_doubled(&f, &c1.add(&c2).unwrap()).unwrap();
    assert_close(&two, &sum, 1e-12);
    assert_close(&shift_convolve(&f, &c1.add(&c2).unwrap()).unwrap(), &sum, 1e-12);
}

#[test]
fn wick_examples() {
    let cov = random_cov(2, 4, 1.0);
    let f = E::monomial(2, 0, &[0, 1], one()).unwrap();
    let w = wick_order(&f, &cov).unwrap();
    let mut want = f.clone();
    want.add_term(0, -cov.get(0, 1));
    assert_close(&w, &want, 1e-15);
    let unit = E::one(2, 0).unwrap();
    assert_eq!(wick_order(&unit, &cov).unwrap(), unit);
}

#[test]
fn wick_inversion() {
    for seed in 0..4 {
        let f = random_element(10, 2, seed + 20, false, true, 1.0);
        let cov = random_cov(8, seed, 1.0);
        let back = shift_convolve(&wick_order(&f, &cov).unwrap(), &cov).unwrap();
        assert_close(&back, &f, 1e-12);
    }
}

#[test]
fn omega_examples() {
    let cov = random_cov(4, 5, 0.5);
    assert!(omega(&E::zero(4, 0).unwrap(), &cov).unwrap().is_empty());
    let a = c(0.3, 0.2);
    let w = E::monomial(4, 0, &[0, 1], a).unwrap();
    let got = omega(&w, &cov).unwrap();
    // ∫ e^{aψ1ψ2}(ψ+ζ) dμ / Z = 1 + aψ1ψ2/(1 + aC12)
    let want = w.scale(1.0 / (1.0 + a * cov.get(0, 1)));
    assert_close(&got, &want, 1e-14);
    // same through the doubled-generator oracle
    let e = w.exp().unwrap();
    let g = shift_convolve_doubled(&e, &cov).unwrap();
    let oracle = g.scale(1.0 / g.body()).log().unwrap();
    assert_close(&got, &oracle, 1e-14);
    assert!(omega(&gen(4, 0, 0), &cov).is_err());
}

#[test]
fn omega_semigroup() {
    for seed in 0..4 {
        let w = random_element(8, 0, seed + 70, true, false, 0.2);
        let c1 = random_cov(8, seed + 1, 0.3);
        let c2 = random_cov(8, seed + 2, 0.3);
        let lhs = omega(&w, &c1.add(&c2).unwrap()).unwrap();
        let rhs = omega(&omega(&w, &c2).unwrap(), &c1).unwrap();
        for (k, v) in lhs.terms() {
            let r = rhs.get(k);
            assert!((v - r).norm() <= 1e-9 * v.norm().max(1e-300) + 1e-15, "monomial {k:b}");
        }
        assert!(rhs.terms().all(|(k, _)| lhs.get(k).norm() > 0.0 || rhs.get(k).norm() < 1e-15));
    }
}

#[test]
fn truncated_ring_matches_exact_evaluation() {
    // Ω(λW) at small λ from the exact ring against the order-two expansion
    let w = random_element(6, 0, 9, true, false, 0.5);
    let cov = random_cov(6, 8, 0.5);
    let wl = w.with_coupling::<3>(1).unwrap().with_degree_cap(Some(8));
    let trunc = omega(&wl, &cov).unwrap();
    assert!(trunc.order(0).unwrap().is_empty());
    let radius = 0.05;
    let pts = 16;
    let samples: Vec<E> = (0..pts)
        .map(|j| {
            let lam = Complex64::from_polar(radius, 2.0 * std::f64::consts::PI * j as f64 / pts as f64);
            omega(&w.scale(lam), &cov).unwrap()
        })
        .collect();
    for k in 0..3 {
        let mut coef = E::zero(6, 0).unwrap();
        for (j, s) in samples.iter().enumerate() {
            let phase = Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * (j * k) as f64 / pts as f64);
            coef = coef.add(&s.scale(phase / (pts as f64 * radius.powi(k as i32)))).unwrap();
        }
        assert_close(&trunc.order(k).unwrap(), &coef, 1e-9);
    }
}

fn small_lattice() -> Arc<Lattice> {
    Arc::new(Lattice::new(1, 2, 2, 1.0, 0.5).unwrap())
}

#[test]
fn kernel_round_trip_is_antisymmetrization() {
    let lat = small_lattice();
    let gens = GeneratorSet::new(lat.clone(), vec![0, 1, 2], (3..12).collect()).unwrap();
    let mut rng = sample::rng(31, 0);
    let mut f = Kernel::new(lat.clone(), 2, 2).unwrap();
    for _ in 0..12 {
        let pts = [rng.gen_range(0..3), rng.gen_range(0..3), rng.gen_range(3..12), rng.gen_range(3..12)];
        f.add_at(&pts, sample::complex(&mut rng)).unwrap();
    }
    let gr = gr_from_kernel(&f, &gens).unwrap();
    let back = kernel_from_gr(&gr, &gens, 2, 2).unwrap();
    let want = f.antisymmetrize(Block::External).antisymmetrize(Block::Internal);
    assert!(back.max_abs_diff(&want).unwrap() < 1e-14);
    // the extracted kernel has no larger seminorm
    let dom = Arc::new(SaturatedSet::boxed(1, 1, 1));
    let n_back = back.seminorm_1inf(&dom, SeminormOptions::default());
    let n_f = f.seminorm_1inf(&dom, SeminormOptions::default());
    assert!(n_back.leq(&n_f).unwrap());
    let zero = Kernel::new(lat, 1, 1).unwrap();
    assert!(gr_from_kernel(&zero, &gens).unwrap().is_empty());
}

#[test]
fn s_empirical_examples() {
    let cv = c(0.09, 0.0);
    let cov = CovarianceMatrix::from_upper(2, |_, _| cv);
    let s = s_empirical(&cov, 2, S_SAMPLES, 1).unwrap();
    assert!((s.value - 0.3).abs() < 1e-15);
    assert!(s.exhaustive);
    assert_eq!(s_empirical(&CovarianceMatrix::zero(6), 6, S_SAMPLES, 1).unwrap().value, 0.0);
    assert!(s_empirical(&cov, 4, S_SAMPLES, 1).is_err());
    let big = random_cov(12, 3, 1.0);
    let est = s_empirical(&big, 6, 500, 2).unwrap();
    assert!(!est.exhaustive);
    assert_eq!(est.tuples, 66 + 500);
}

#[test]
fn s_empirical_subadditive() {
    for seed in 0..20 {
        let a = random_cov(8, seed, 1.0);
        let b = random_cov(8, seed + 1000, 0.5);
        let sa = s_empirical(&a, 8, S_SAMPLES, 0).unwrap().value;
        let sb = s_empirical(&b, 8, S_SAMPLES, 0).unwrap().value;
        let sab = s_empirical(&a.add(&b).unwrap(), 8, S_SAMPLES, 0).unwrap().value;
        assert!(sab <= (sa + sb) * (1.0 + 1e-12));
    }
}

#[test]
fn n_functional_examples() {
    let lat = small_lattice();
    let gens = GeneratorSet::all_internal(lat.clone()).unwrap();
    let dom = Arc::new(SaturatedSet::boxed(1, 1, 1));
    let cc = NormElement::constant(dom.clone(), 0.7);
    let opts = SeminormOptions::default();
    let zero = Grassmann::zero_unchecked(gens.n_gen(), 0).unwrap();
    let n0 = n_functional(&zero, &gens, &cc, 0.5, 2.0, &dom, &unit_rho, opts).unwrap();
    assert!(n0.coeffs().iter().all(|&x| x == 0.0));

    let mut v = Kernel::new(lat.clone(), 0, 4).unwrap();
    v.add_at(&[0, 5, 2, 7], c(0.5, 0.0)).unwrap();
    v.add_at(&[1, 4, 3, 6], c(-0.25, 0.1)).unwrap();
    let gr = gr_from_kernel(&v, &gens).unwrap();
    let (b, alpha) = (0.5, 2.0);
    let n = n_functional(&gr, &gens, &cc, b, alpha, &dom, &unit_rho, opts).unwrap();
    let rep = kernel_from_gr(&gr, &gens, 0, 4).unwrap();
    let want = cc.mul(&rep.seminorm_1inf(&dom, opts)).unwrap().scale(alpha.powi(4) * b * b);
    for (x, y) in n.coeffs().iter().zip(want.coeffs()) {
        assert!((x - y).abs() <= 1e-14 * y.abs().max(1.0));
    }
    let upper = cc.mul(&v.seminorm_1inf(&dom, opts)).unwrap().scale(alpha.powi(4) * b * b);
    assert!(n.leq(&upper).unwrap());
    let n2 = n_functional(&gr, &gens, &cc, b, 2.0 * alpha, &dom, &unit_rho, opts).unwrap();
    for (x, y) in n2.coeffs().iter().zip(n.coeffs()) {
        assert!((x - 16.0 * y).abs() <= 1e-12 * x.abs().max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn product_is_associative(s1 in 0u64..1000, s2 in 0u64..1000, s3 in 0u64..1000) {
        let a = random_element(6, 1, s1, false, true, 1.0);
        let b = random_element(6, 1, s2, false, true, 1.0);
        let d = random_element(6, 1, s3, false, true, 1.0);
        let l = a.mul(&b).unwrap().mul(&d).unwrap();
        let r = a.mul(&b.mul(&d).unwrap()).unwrap();
        prop_assert!(l.max_abs_diff(&r).unwrap() < 1e-12 * l.max_abs().max(1.0));
    }

    #[test]
    fn even_elements_commute(s1 in 0u64..1000, s2 in 0u64..1000) {
        let a = random_element(6, 0, s1, true, true, 1.0);
        let b = random_element(6, 0, s2, true, true, 1.0);
        let l = a.mul(&b).unwrap();
        let r = b.mul(&a).unwrap();
        prop_assert!(l.max_abs_diff(&r).unwrap() < 1e-12 * l.max_abs().max(1.0));
    }
}
