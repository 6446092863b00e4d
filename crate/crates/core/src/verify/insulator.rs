use std::sync::Arc;

use super::{Check, Suite};
use crate::insulator::{greens, greens_exact, k_kernel, scaling_study, v0_from_potential, Potential};
use crate::kernel::Kernel;
use crate::lattice::Lattice;
use crate::propagator::PropagatorSpec;
use crate::Result;

pub const COUPLINGS: [f64; 5] = [1e-3, 3e-3, 1e-2, 3e-2, 1e-1];

fn rel_diff(a: &Kernel, b: &Kernel) -> Result<f64> {
    let scale = b.max_abs();
    let d = a.max_abs_diff(b)?;
    Ok(if scale == 0.0 { d } else { d / scale })
}

fn fixture(l: usize, t: usize, potential: &Potential) -> Result<(Kernel, Kernel)> {
    let lat = Arc::new(Lattice::new(1, l, t, 1.0, 0.5)?);
    let v0 = v0_from_potential(potential, &lat)?;
    let c = PropagatorSpec::filled_band().c_position(&lat)?;
    Ok((v0, c))
}

/// First-order identities and quadratic scaling on the 4 × 4 desk lattice, and
/// the truncated backend against the exact one on 2 × 2.
pub fn insulator_suite(potential: &Potential) -> Suite {
    let mut suite = Suite::new("insulator-pipeline");
    let mut g2 = Check::new("first_order_g2_is_k", 1e-8);
    let mut g4 = Check::new("first_order_g4_is_v0", 1e-8);
    let mut g6 = Check::new("first_order_g6_vanishes", 1e-12);
    let mut slopes = Check::new("quadratic_deviation_slopes", 0.05);
    let mut backend = Check::new("truncated_vs_exact_backend", 1e-9);

    let mut desk = || -> Result<()> {
        let (v0, c) = fixture(4, 4, potential)?;
        let set = greens(&v0, &c, 2)?;
        let k = k_kernel(&v0, &c)?;
        g2.observe(rel_diff(set.coefficient(1, 1), &k)?);
        g4.observe(rel_diff(set.coefficient(1, 2), &v0)?);
        g6.observe(set.coefficient(1, 3).max_abs() / v0.max_abs().max(f64::MIN_POSITIVE));
        for fit in scaling_study(&set, &k, &v0, &COUPLINGS)? {
            slopes.observe((fit.slope - 2.0).abs());
        }
        Ok(())
    };
    if let Err(e) = desk() {
        for c in [&mut g2, &mut g4, &mut g6, &mut slopes] {
            c.fail(e.to_string());
        }
    }

    let mut small = || -> Result<()> {
        let (v0, c) = fixture(2, 2, potential)?;
        let a = greens(&v0, &c, 2)?;
        let b = greens_exact(&v0, &c, 2)?;
        for k in 0..=2 {
            for n in 1..=3 {
                let (x, y) = (a.coefficient(k, n), b.coefficient(k, n));
                backend.observe(x.max_abs_diff(y)? / y.max_abs().max(1.0));
            }
        }
        Ok(())
    };
    if let Err(e) = small() {
        backend.fail(e.to_string());
    }
    for c in [g2, g4, g6, slopes, backend] {
        suite.push(c);
    }
    suite
}
