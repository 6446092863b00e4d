use std::f64::consts::PI;
use std::sync::Arc;

use rand::Rng;

use super::{Check, Suite};
use crate::grassmann::{s_empirical, CovarianceMatrix};
use crate::lattice::Lattice;
use crate::norm::{MultiIndex, SaturatedSet};
use crate::propagator::{Counterterm, Cutoff, Dispersion, Measure, PropagatorSpec};
use crate::sample;
use crate::Result;

pub const POINT_PAIRS: usize = 1000;
pub const WEIGHTED_PAIRS: usize = 200;
pub const GAPPED_SPECS: usize = 10;
pub const S_SAMPLES: usize = 2000;
pub const TIME_DRAWS: usize = 40;
pub const SERIES_DRAWS: usize = 8;
pub const DERIVATIVE_DRAWS: usize = 40;
/// Relative slack on quadrature-evaluated right sides.
pub const QUAD_SLACK: f64 = 1e-9;

pub fn bump_band() -> PropagatorSpec {
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
    .expect("valid spec")
}

fn random_gapped(rng: &mut impl Rng) -> Result<PropagatorSpec> {
    let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    let c0 = rng.gen_range(1.5..3.0);
    let c1 = rng.gen_range(0.0..c0 - 1.0);
    PropagatorSpec::new(
        1,
        Dispersion::Cosine { c0: sign * c0, c: vec![sign * c1] },
        Cutoff::Unit,
        None,
        None,
        c0 - c1,
        4,
        4,
        vec![1.0],
    )
}

fn moment(t: f64, x: f64, delta: &MultiIndex) -> f64 {
    t.abs().powi(delta.0[0] as i32) * x.abs().powi(delta.0[1] as i32)
}

pub fn propagator_suite(seed: u64) -> Suite {
    let mut suite = Suite::new("propagator-bounds");
    let spec = bump_band();
    let low = Arc::new(SaturatedSet::total_degree(1, 2));
    let high = Arc::new(SaturatedSet::total_degree(1, 5));
    let ints = spec.derivative_integrals(&high);

    let mut pointwise = Check::new("pointwise_momentum_bound", QUAD_SLACK);
    let mut rng = sample::rng(seed, 0x44);
    for _ in 0..POINT_PAIRS {
        let t = rng.gen_range(-4.0..4.0);
        let x = rng.gen_range(-6.0..6.0);
        let c = spec.c_continuum(t, &[x]).norm();
        let p: Vec<(f64, f64)> = low.members().iter().map(|delta| (moment(t, x, delta) * c, ints.get(delta))).collect();
        pointwise.bound(&p);
    }
    suite.push(pointwise);

    let mut weighted = Check::new("weighted_pointwise_bound", QUAD_SLACK);
    let mut rng = sample::rng(seed, 0x47);
    let d = spec.d as i32;
    let mu = spec.mu;
    let eps = MultiIndex(vec![1, 1]);
    for _ in 0..WEIGHTED_PAIRS {
        let t = rng.gen_range(-4.0..4.0);
        let x = rng.gen_range(-6.0..6.0);
        let c = spec.c_continuum(t, &[x]).norm();
        let expo = 1.0 + 1.0 / (d as f64 + 1.0);
        let weight = 1.0 + mu.powi(d + 2) * (t.abs() * x.abs()).powf(expo);
        let mut p = Vec::new();
        for delta in low.members() {
            let mut tail = 0.0;
            for j in 0..=spec.d {
                let mut shifted = delta.add(&eps);
                shifted.0[j] += 1;
                tail += ints.get(&shifted);
            }
            let rhs = ints.get(delta) + mu.powi(d + 2) / (d as f64 + 1.0) * tail;
            p.push((weight * moment(t, x, delta) * c, rhs));
        }
        weighted.bound(&p);
    }
    suite.push(weighted.with_note("right sides with temporal order 0 diverge logarithmically and hold trivially"));

    let mut gram = Check::new("s_empirical_below_bounds", 0.0);
    let lat = Arc::new(Lattice::new(1, 4, 2, 1.0, 0.5).expect("valid lattice"));
    let points: Vec<usize> = (0..lat.npts()).collect();
    let mut rng = sample::rng(seed, 0x48);
    for k in 0..GAPPED_SPECS {
        let run = |rng: &mut rand_chacha::ChaCha8Rng| -> Result<(f64, f64)> {
            let spec = random_gapped(rng)?;
            let cov = CovarianceMatrix::from_kernel(&spec.c_position(&lat)?, &points)?;
            let s = s_empirical(&cov, 6, S_SAMPLES, seed.wrapping_add(k as u64))?.value;
            let bound = spec.gram_bound().value.min(spec.s_bound_gapped(&Measure::Lattice(lat.clone()))?.total.sqrt());
            Ok((s, bound))
        };
        match run(&mut rng) {
            Ok(p) => gram.bound(&[p]),
            Err(e) => gram.fail(e.to_string()),
        }
    }
    suite.push(gram);

    let mut time = Check::new("time_kernel_vs_quadrature", 1e-6);
    let mut rng = sample::rng(seed, 0x49);
    for _ in 0..TIME_DRAWS {
        let run = |rng: &mut rand_chacha::ChaCha8Rng| -> Result<f64> {
            let spec = random_gapped(rng)?;
            let t = rng.gen_range(-3.0..3.0);
            let k = rng.gen_range(-PI..PI);
            let exact = spec.c_time_kernel(t, &[k])?;
            let (q, _) = spec.c_time_quadrature(t, &[k])?;
            Ok((exact - q).abs())
        };
        match run(&mut rng) {
            Ok(e) => time.observe(e),
            Err(e) => time.fail(e.to_string()),
        }
    }
    suite.push(time);

    let mut series = Check::new("counterterm_series_vs_direct", 1e-10);
    let series_lat = Arc::new(Lattice::new(1, 4, 4, 1.0, 0.5).expect("valid lattice"));
    let mut rng = sample::rng(seed, 0x4a);
    let mut skipped = 0;
    for _ in 0..SERIES_DRAWS {
        let mut s = PropagatorSpec::cosine_band();
        s.counterterm = Some(Counterterm { c0: rng.gen_range(-0.1..0.1), c1: rng.gen_range(-0.1..0.1) });
        match s.counterterm_series(&series_lat, 40) {
            Ok(rep) => series.observe(rep.max_series_error),
            Err(crate::Error::Numeric(_)) => skipped += 1,
            Err(e) => series.fail(e.to_string()),
        }
    }
    if skipped > 0 {
        suite.skipped.push(("counterterm_series_vs_direct".into(), format!("{skipped} draws failed the ratio check")));
    }
    suite.push(series);

    let mut deriv = Check::new("counterterm_derivative_vs_differences", 1e-6);
    let mut rng = sample::rng(seed, 0x4b);
    for _ in 0..DERIVATIVE_DRAWS {
        let mut s = bump_band();
        s.counterterm = Some(Counterterm { c0: rng.gen_range(-0.1..0.1), c1: rng.gen_range(-0.1..0.1) });
        let dp = Counterterm { c0: rng.gen_range(-0.3..0.3), c1: rng.gen_range(-0.3..0.3) };
        let k0 = rng.gen_range(-4.0..4.0);
        let k = rng.gen_range(-PI..PI);
        let (a, fd) = s.counterterm_derivative(&dp, k0, &[k], 1e-4);
        deriv.observe((a - fd).norm());
    }
    suite.push(deriv);
    suite
}

pub fn quadrature_suite() -> Suite {
    let mut suite = Suite::new("quadrature");
    let (g1, g2) = PropagatorSpec::cosine_band().g1_g2();
    let mut c1 = Check::new("g1_closed_form", 1e-8);
    c1.observe((g1 - 2.0 * PI / 3f64.sqrt()).abs());
    suite.push(c1);
    let mut c2 = Check::new("g2_closed_form", 1e-8);
    c2.observe((g2 - 4.0 * PI / 3f64.powf(1.5)).abs());
    suite.push(c2);
    suite
}
