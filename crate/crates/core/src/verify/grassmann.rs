use num_complex::Complex64;
use rand::Rng;

use super::{Check, Suite};
use crate::grassmann::{gaussian_integral, omega, s_empirical, shift_convolve, wick_order, CovarianceMatrix, ExactElement};
use crate::sample;
use crate::Result;

pub const MOMENT_DRAWS: usize = 50;
pub const WICK_DRAWS: usize = 20;
pub const SEMIGROUP_DRAWS: usize = 10;
pub const SUBADDITIVE_PAIRS: usize = 50;

pub fn random_cov(rng: &mut impl Rng, n: usize, scale: f64) -> CovarianceMatrix {
    let vals: Vec<Complex64> = (0..n * n).map(|_| sample::complex(rng) * scale).collect();
    CovarianceMatrix::from_upper(n, |i, j| vals[i * n + j])
}

/// Each admissible monomial is populated with probability 0.4.
pub fn random_element(rng: &mut impl Rng, n_gen: usize, n_ext: usize, even: bool, scale: f64) -> ExactElement {
    let mut f = ExactElement::zero(n_gen, n_ext).expect("within capacity");
    for bits in 1u64..(1u64 << n_gen) {
        if even && bits.count_ones() % 2 == 1 {
            continue;
        }
        if rng.gen_bool(0.4) {
            f.add_term(bits, sample::complex(rng) * scale);
        }
    }
    f
}

fn rel_diff(a: &ExactElement, b: &ExactElement) -> Result<f64> {
    let scale = a.max_abs().max(b.max_abs());
    let d = a.max_abs_diff(b)?;
    Ok(if scale == 0.0 { d } else { d / scale })
}

pub fn grassmann_suite(seed: u64) -> Suite {
    let mut suite = Suite::new("grassmann-engine");

    let mut moment = Check::new("four_point_moment", 1e-12);
    let mut rng = sample::rng(seed, 0x31);
    for _ in 0..MOMENT_DRAWS {
        let cov = random_cov(&mut rng, 4, 1.0);
        let f = ExactElement::monomial(4, 0, &[0, 1, 2, 3], Complex64::new(1.0, 0.0)).expect("valid monomial");
        match gaussian_integral(&f, &cov) {
            Ok(m) => {
                let g = |i, j| cov.get(i, j);
                let want = g(0, 1) * g(2, 3) - g(0, 2) * g(1, 3) + g(0, 3) * g(1, 2);
                moment.observe((m.body() - want).norm() / want.norm().max(1.0));
            }
            Err(e) => moment.fail(e.to_string()),
        }
    }
    suite.push(moment);

    let mut wick = Check::new("wick_inversion", 1e-12);
    let mut rng = sample::rng(seed, 0x32);
    for k in 0..WICK_DRAWS {
        let (n_gen, n_ext) = [(10, 2), (10, 0), (8, 3), (6, 1)][k % 4];
        let f = random_element(&mut rng, n_gen, n_ext, false, 1.0);
        let cov = random_cov(&mut rng, n_gen - n_ext, 1.0);
        let run = || -> Result<f64> {
            let back = shift_convolve(&wick_order(&f, &cov)?, &cov)?;
            rel_diff(&back, &f)
        };
        match run() {
            Ok(e) => wick.observe(e),
            Err(e) => wick.fail(e.to_string()),
        }
    }
    suite.push(wick);

    let mut semi = Check::new("omega_semigroup", 1e-9);
    let mut rng = sample::rng(seed, 0x33);
    for _ in 0..SEMIGROUP_DRAWS {
        let w = random_element(&mut rng, 8, 0, true, 0.2);
        let c1 = random_cov(&mut rng, 8, 0.3);
        let c2 = random_cov(&mut rng, 8, 0.3);
        let run = || -> Result<f64> {
            let lhs = omega(&w, &c1.add(&c2)?)?;
            let rhs = omega(&omega(&w, &c2)?, &c1)?;
            // relative on every coefficient, with an absolute floor for
            // coefficients that cancel to rounding level
            let mut worst: f64 = 0.0;
            let floor = 1e-15 * lhs.max_abs().max(1.0);
            for (k, v) in lhs.terms() {
                let r = rhs.get(k);
                worst = worst.max(((v - r).norm() - floor).max(0.0) / v.norm().max(floor));
            }
            for (k, r) in rhs.terms() {
                if lhs.get(k) == Complex64::default() {
                    worst = worst.max((r.norm() - floor).max(0.0) / floor);
                }
            }
            Ok(worst)
        };
        match run() {
            Ok(e) => semi.observe(e),
            Err(e) => semi.fail(e.to_string()),
        }
    }
    suite.push(semi);

    let mut sub = Check::new("s_empirical_subadditive", 1e-12);
    let mut rng = sample::rng(seed, 0x34);
    for _ in 0..SUBADDITIVE_PAIRS {
        let a = random_cov(&mut rng, 8, 1.0);
        let scale = rng.gen_range(0.1..1.0);
        let b = random_cov(&mut rng, 8, scale);
        let run = || -> Result<(f64, f64)> {
            let sa = s_empirical(&a, 8, 0, 0)?.value;
            let sb = s_empirical(&b, 8, 0, 0)?.value;
            let sab = s_empirical(&a.add(&b)?, 8, 0, 0)?.value;
            Ok((sab, sa + sb))
        };
        match run() {
            Ok(p) => sub.bound(&[p]),
            Err(e) => sub.fail(e.to_string()),
        }
    }
    suite.push(sub);
    suite
}
