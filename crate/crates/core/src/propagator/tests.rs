use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use super::*;
use crate::lattice::Lattice;
use crate::norm::{MultiIndex, SaturatedSet};

fn bump_band() -> PropagatorSpec {
    PropagatorSpec::new(
        1,
        Dispersion::Cosine { c0: 2.0, c: vec![0.7] },
        Cutoff::Bump { inner: 1.0, outer: 2.5 },
        None,
        None,
        1.0,
        4,
        4,
        vec![1.0],
    )
    .unwrap()
}

fn constant(lambda: f64) -> PropagatorSpec {
    PropagatorSpec::new(1, Dispersion::Constant { lambda }, Cutoff::Unit, None, None, lambda.abs(), 4, 4, vec![1.0])
        .unwrap()
}

#[test]
fn time_kernel_branches() {
    let spec = constant(1.5);
    let v = spec.c_time_kernel(0.4, &[0.3]).unwrap();
    assert!((v + (-1.5f64 * 0.4).exp()).abs() < 1e-15);
    assert_eq!(spec.c_time_kernel(-0.4, &[0.3]).unwrap(), 0.0);
    assert_eq!(spec.c_time_kernel(0.0, &[0.3]).unwrap(), spec.c_time_kernel(-1e-300, &[0.3]).unwrap());
    let neg = constant(-1.5);
    assert!((neg.c_time_kernel(-0.4, &[0.0]).unwrap() - (-0.6f64).exp()).abs() < 1e-15);
    assert_eq!(neg.c_time_kernel(0.0, &[0.0]).unwrap(), 1.0);
    assert_eq!(neg.c_time_kernel(0.1, &[0.0]).unwrap(), 0.0);
}

#[test]
fn time_kernel_rejects_chi() {
    let mut spec = bump_band();
    spec.chi = Some(Chi { amp: 0.5, inner: 0.5, outer: 1.0 });
    assert!(matches!(spec.c_time_kernel(0.1, &[0.0]), Err(Error::Usage(_))));
}

#[test]
fn time_kernel_matches_quadrature() {
    for lambda in [2.5, -1.5, 1.0, 0.4] {
        let spec = constant(lambda);
        for t in [-1.3, -0.2, 0.0, 1e-3, 0.3, 1.5, 3.0] {
            let exact = spec.c_time_kernel(t, &[0.0]).unwrap();
            let (q, err) = spec.c_time_quadrature(t, &[0.0]).unwrap();
            assert!((exact - q).abs() < 1e-8, "lambda={lambda} t={t}: {exact} vs {q} (err {err:e})");
        }
    }
}

#[test]
fn gap_condition_checked() {
    let r = PropagatorSpec::new(1, Dispersion::Cosine { c0: 0.5, c: vec![1.0] }, Cutoff::Unit, None, None, 0.2, 2, 2, vec![1.0]);
    assert!(matches!(r, Err(Error::Domain(_))));
    let r = PropagatorSpec::new(
        1,
        Dispersion::Quadratic { gap: 1.0, a: 0.5 },
        Cutoff::Bump { inner: 2.0, outer: 4.0 },
        None,
        None,
        1.0,
        2,
        2,
        vec![1.0],
    );
    assert!(matches!(r, Err(Error::Domain(_))));
}

#[test]
fn position_kernel_structure() {
    let spec = PropagatorSpec::cosine_band();
    let lat = Arc::new(Lattice::new(1, 4, 4, 1.0, 0.5).unwrap());
    let c = spec.c_position(&lat).unwrap();
    let n = lat.npts();
    for p in 0..n {
        for q in 0..n {
            let v = c.get(&[p, q]);
            assert_eq!(v, -c.get(&[q, p]));
            if lat.conj_of(p) == lat.conj_of(q) || lat.spin_of(p) != lat.spin_of(q) {
                assert_eq!(v, Complex64::default());
            }
        }
    }
}

#[test]
fn position_kernel_matches_quadrature_path() {
    let spec = PropagatorSpec::cosine_band();
    let lat = Arc::new(Lattice::new(1, 4, 4, 1.0, 0.5).unwrap());
    let c = spec.c_position(&lat).unwrap();
    let grid = dual_grid(&lat);
    let mut worst: f64 = 0.0;
    for st in 0..lat.spacetime_points() {
        for st2 in 0..lat.spacetime_points() {
            let p = lat.with_spin_conj(st, 0, 0);
            let q = lat.with_spin_conj(st2, 0, 1);
            let t = (lat.coord(p, 0) as f64 - lat.coord(q, 0) as f64) * lat.dt;
            let n = lat.coord(p, 1) as f64 - lat.coord(q, 1) as f64;
            let mut s = Complex64::default();
            for k in &grid {
                let (v, _) = spec.c_time_quadrature(t, k).unwrap();
                s += Complex64::from_polar(v, k[0] * n);
            }
            s /= lat.spatial_volume();
            worst = worst.max((s - c.get(&[p, q])).norm());
        }
    }
    assert!(worst < 1e-6, "{worst}");
}

#[test]
fn zero_amplitude_chi_is_chi_free() {
    let base = bump_band();
    let mut with = base.clone();
    with.chi = Some(Chi { amp: 0.0, inner: 0.5, outer: 1.0 });
    for t in [-0.5, 0.0, 0.7] {
        let a = with.c_time(t, &[0.4]);
        let b = base.c_time_kernel(t, &[0.4]).unwrap();
        assert!((a.re - b).abs() < 1e-15 && a.im.abs() < 1e-15);
    }
}

#[test]
fn chi_time_kernel_matches_direct_sum() {
    let mut spec = bump_band();
    spec.chi = Some(Chi { amp: 0.8, inner: 0.5, outer: 1.5 });
    let k = [0.3];
    let t = 0.6;
    let u = spec.u(&k);
    let e = spec.e_eff(&k);
    // χ part alone by a fine trapezoid sum over its compact support
    let n = 20000;
    let h = 3.0 / n as f64;
    let mut part = Complex64::default();
    for i in 0..=n {
        let k0 = -1.5 + i as f64 * h;
        let w = if i == 0 || i == n { 0.5 * h } else { h };
        part += Complex64::from_polar(w * spec.chi_value(k0, &k), -k0 * t) / Complex64::new(-e, k0);
    }
    let expect = u * time_kernel(e, t) - part / (2.0 * PI);
    assert!((spec.c_time(t, &k) - expect).norm() < 1e-9);
}

#[test]
fn g1_g2_oracles() {
    let spec = PropagatorSpec::cosine_band();
    let (g1, g2) = spec.g1_g2();
    assert!((g1 - 2.0 * PI / 3f64.sqrt()).abs() < 1e-8, "{g1}");
    assert!((g2 - 4.0 * PI / 3f64.powf(1.5)).abs() < 1e-8, "{g2}");
    let n = 4096;
    let h = 2.0 * PI / n as f64;
    let (t1, t2) = (0..n).fold((0.0, 0.0), |(a, b), i| {
        let e = 2.0 + (-PI + i as f64 * h).cos();
        (a + h / e, b + h / (e * e))
    });
    assert!((g1 - t1).abs() < 1e-8 && (g2 - t2).abs() < 1e-8);
    assert!(g1 >= g2);
    assert!(spec.gamma() >= 1.0);
}

#[test]
fn gram_bounds() {
    let spec = constant(1.3);
    let g = spec.gram_bound();
    assert_eq!(g.value, f64::INFINITY);
    assert!((g.constant_band.unwrap() - 1.0).abs() < 1e-12);
    assert!(PropagatorSpec::cosine_band().gram_bound().constant_band.is_none());

    let band = bump_band();
    let one = |_: f64, _: &[f64]| 1.0;
    assert_eq!(band.gram_bound_partitioned(&[&one], &Measure::Continuum).value, band.gram_bound().value);

    let left = |k0: f64, _: &[f64]| plateau_value(k0 + 2.0, 0.5, 1.5);
    let right = |k0: f64, _: &[f64]| plateau_value(k0 - 1.0, 0.5, 1.0);
    let rep = band.gram_bound_partitioned(&[&left, &right], &Measure::Continuum);
    let direct = |f: &dyn Fn(f64, &[f64]) -> f64, lo: f64, hi: f64| -> f64 {
        let rule = QuadRule { panels: 400, order: 4 };
        let mut s = 0.0;
        for (k, wk) in rule.nodes(-2.5, 2.5) {
            for (k0, w0) in rule.nodes(lo, hi) {
                s += wk * w0 * (band.c_k(k0, &[k]) * f(k0, &[k]).powi(2)).norm();
            }
        }
        (s / (4.0 * PI * PI)).sqrt()
    };
    let expect = direct(&left, -3.5, -0.5).max(direct(&right, 0.0, 2.0));
    assert!((rep.value - expect).abs() < 1e-8, "{} vs {expect}", rep.value);
}

#[test]
fn s_bound_slab_term() {
    let spec = PropagatorSpec::cosine_band();
    let s = spec.s_bound_gapped(&Measure::Continuum).unwrap();
    assert!((s.e - 3.0).abs() < 1e-12);
    assert_eq!(s.chi_term, 0.0);
    assert!((s.u_term - 1.0).abs() < 1e-12);
    // ∫ dk0/2π over |k0| <= E of 1/√(k0² + e²) = asinh(E/|e|)/π
    let slab: f64 =
        QuadRule { panels: 256, order: 8 }.integrate(-PI, PI, |k| (3.0 / (2.0 + k.cos())).asinh() / PI) / (2.0 * PI);
    assert!((s.slab_term - slab).abs() < 1e-8);
    assert!((s.total - (9.0 + 6.0 * slab)).abs() < 1e-8);
}

#[test]
fn derivative_integrals_closed_form() {
    let spec = bump_band();
    let set = Arc::new(SaturatedSet::total_degree(1, 2));
    let ints = spec.derivative_integrals(&set);
    assert_eq!(ints.get(&MultiIndex(vec![0, 0])), f64::INFINITY);
    assert_eq!(ints.get(&MultiIndex(vec![0, 1])), f64::INFINITY);
    // ∫ dk0/2π 1/(k0² + e²) = 1/(2|e|)
    let expect = QuadRule { panels: 256, order: 8 }
        .integrate(-2.5, 2.5, |k| spec.u(&[k]) / (2.0 * spec.dispersion.eval(&[k]).abs()))
        / (2.0 * PI);
    let got = ints.get(&MultiIndex(vec![1, 0]));
    assert!((got - expect).abs() < 1e-7 * expect, "{got} vs {expect}");
    // |∂_{k0}^2 C| = 2/(k0²+e²)^{3/2}; ∫ dk0 of that is 4/e²
    let expect2 = QuadRule { panels: 256, order: 8 }
        .integrate(-2.5, 2.5, |k| spec.u(&[k]) * 4.0 / spec.dispersion.eval(&[k]).powi(2))
        / (4.0 * PI * PI);
    let got2 = ints.get(&MultiIndex(vec![2, 0]));
    assert!((got2 - expect2).abs() < 1e-7 * expect2, "{got2} vs {expect2}");
    assert!(ints.get(&MultiIndex(vec![1, 1])).is_finite());
}

#[test]
fn pointwise_momentum_inequality() {
    let spec = bump_band();
    let set = Arc::new(SaturatedSet::total_degree(1, 2));
    let ints = spec.derivative_integrals(&set);
    for &(t, x) in &[(0.3, 0.0), (-0.7, 1.0), (1.2, -2.0), (2.5, 3.0), (0.0, 0.0)] {
        let c = spec.c_continuum(t, &[x]).norm();
        for delta in set.members() {
            let lhs = (t as f64).abs().powi(delta.0[0] as i32) * (x as f64).abs().powi(delta.0[1] as i32) * c;
            assert!(lhs <= ints.get(delta) * (1.0 + 1e-9), "{delta}: {lhs} > {}", ints.get(delta));
        }
    }
}

#[test]
fn check_norms_examples() {
    let domain = Arc::new(SaturatedSet::boxed(1, 2, 2));
    let lo = [-1.0, -1.0];
    let hi = [1.0, 1.0];
    let rule = QuadRule { panels: 8, order: 8 };
    let id0 = |v: &[Jet]| v[0].clone();
    let n = check_norms(&id0, &domain, NormMode::Sup, (&lo, &hi), None, rule).unwrap();
    assert!((n.get(&MultiIndex(vec![1, 0])) - 1.0).abs() < 1e-15);
    assert_eq!(n.get(&MultiIndex(vec![2, 0])), 0.0);
    let too_big = Arc::new(SaturatedSet::boxed(1, 3, 1));
    assert!(check_norms(&id0, &too_big, NormMode::Sup, (&lo, &hi), Some((2, 2)), rule).is_err());

    let spec = bump_band();
    let set = domain.clone();
    let f = |v: &[Jet]| {
        let pt: Vec<f64> = v.iter().map(|j| j.value().re).collect();
        spec.c_jet(&pt, &set)
    };
    let g = |v: &[Jet]| v[1].cos().mul(&v[0]).add_const(Complex64::new(2.0, 0.0));
    let fg = |v: &[Jet]| f(v).mul(&g(v));
    let b = (&lo[..], &hi[..]);
    let nf = check_norms(&f, &domain, NormMode::Integral, b, None, rule).unwrap();
    let ng = check_norms(&g, &domain, NormMode::Sup, b, None, rule).unwrap();
    let nfg = check_norms(&fg, &domain, NormMode::Integral, b, None, rule).unwrap();
    assert!(nfg.leq(&nf.mul(&ng).unwrap().scale(1.0 + 1e-12)).unwrap());
}

#[test]
fn contraction_element_shape() {
    let spec = PropagatorSpec::cosine_band();
    let domain = Arc::new(SaturatedSet::boxed(1, 2, 2));
    let el = spec.contraction_element(&domain, Variant::Gapped);
    let c0 = el.get(&MultiIndex(vec![0, 0]));
    let c1 = el.get(&MultiIndex(vec![1, 0]));
    assert!((c1 / c0 - 2.0 / spec.mu).abs() < 1e-12);
    assert!((el.get(&MultiIndex(vec![0, 1])) / c0 - 2.0 / spec.mu).abs() < 1e-12);
    assert_eq!(el.get(&MultiIndex(vec![0, 3 - 1 + 1 - 1])), c0 * (2.0 / spec.mu).powi(2));

    let mut low = spec.clone();
    low.r = 1;
    let el = low.contraction_element(&domain, Variant::Gapped);
    for (delta, v) in el.iter() {
        if delta.is_zero() {
            assert!(v.is_finite());
        } else {
            assert_eq!(v, f64::INFINITY);
        }
    }
}

#[test]
fn delta_e_hat_constant_and_zero() {
    let lat = Arc::new(Lattice::new(1, 4, 2, 0.5, 0.25).unwrap());
    let mut spec = PropagatorSpec::new(
        1,
        Dispersion::Cosine { c0: 2.0, c: vec![1.0] },
        Cutoff::Unit,
        None,
        None,
        1.0,
        2,
        2,
        vec![0.5],
    )
    .unwrap();
    assert!(spec.delta_e_hat(&lat).unwrap().is_empty());
    spec.counterterm = Some(Counterterm { c0: 0.3, c1: 0.0 });
    let k = spec.delta_e_hat(&lat).unwrap();
    for p in 0..lat.npts() {
        for q in 0..lat.npts() {
            let v = k.get(&[p, q]);
            let same = lat.spacetime_of(p) == lat.spacetime_of(q)
                && lat.spin_of(p) == lat.spin_of(q)
                && lat.conj_of(p) == lat.conj_of(q);
            let expect = if same { 0.3 / lat.cell_volume() } else { 0.0 };
            assert!((v - expect).norm() < 1e-12, "{p} {q} {v}");
        }
    }
}

#[test]
fn delta_e_hat_phase_sign() {
    let lat = Arc::new(Lattice::new(1, 4, 1, 1.0, 1.0).unwrap());
    let mut spec = PropagatorSpec::cosine_band();
    spec.counterterm = Some(Counterterm { c0: 0.0, c1: 0.2 });
    let k = spec.delta_e_hat(&lat).unwrap();
    // cos k has Fourier weight 1/2 at offsets ±1
    let p0 = lat.with_spin_conj(1, 0, 0);
    let q0 = lat.with_spin_conj(0, 0, 0);
    assert!((k.get(&[p0, q0]) - 0.1).norm() < 1e-12);
    let p1 = lat.with_spin_conj(1, 0, 1);
    let q1 = lat.with_spin_conj(0, 0, 1);
    assert!((k.get(&[p1, q1]) - 0.1).norm() < 1e-12);
    assert_eq!(k.get(&[p0, q1]), Complex64::default());
}

#[test]
fn counterterm_series_matches_direct() {
    let lat = Arc::new(Lattice::new(1, 4, 4, 1.0, 0.5).unwrap());
    let base = PropagatorSpec::cosine_band();
    let zero = base.counterterm_series(&lat, 0).unwrap();
    assert_eq!(zero.max_series_error, 0.0);
    let mut spec = base.clone();
    spec.counterterm = Some(Counterterm { c0: 0.05, c1: 0.03 });
    let rep = spec.counterterm_series(&lat, 40).unwrap();
    assert!(rep.ratio < 1.0);
    assert!(rep.max_series_error < 1e-10, "{}", rep.max_series_error);
    assert!(rep.bound.constant_term().is_finite());
    let mut big = base;
    big.counterterm = Some(Counterterm { c0: 1.0, c1: 0.0 });
    assert!(matches!(big.counterterm_series(&lat, 4), Err(Error::Numeric(_))));
}

#[test]
fn counterterm_derivative() {
    let mut spec = bump_band();
    spec.counterterm = Some(Counterterm { c0: 0.1, c1: -0.05 });
    let dp = Counterterm { c0: 0.2, c1: 0.3 };
    for &(k0, k) in &[(0.0, 0.2), (1.5, -1.1), (-3.0, 2.0)] {
        let (a, fd) = spec.counterterm_derivative(&dp, k0, &[k], 1e-4);
        assert!((a - fd).norm() < 1e-6, "{a} vs {fd}");
    }
}
