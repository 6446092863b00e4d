use std::sync::Arc;

use rand::Rng;

use super::{pairs, Check, Suite};
use crate::norm::{majorant_constant, Majorant, NormElement, SaturatedSet, ScalarSeries};
use crate::sample;

pub const PAIRS: usize = 200;

fn draw(rng: &mut impl Rng, domain: &Arc<SaturatedSet>, body_max: f64) -> NormElement {
    let n = domain.len();
    let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
    v[0] = rng.gen_range(0.0..body_max);
    NormElement::from_coeffs(domain.clone(), v).expect("length matches domain")
}

pub fn norm_suite(seed: u64) -> Suite {
    let mut suite = Suite::new("norm-domain");
    let boxes = [Arc::new(SaturatedSet::boxed(1, 3, 3)), Arc::new(SaturatedSet::boxed(2, 3, 3))];

    let mut product_bound = Check::new("inverse_product_dominates_sum", 0.0);
    let mut rng = sample::rng(seed, 0x41);
    for k in 0..PAIRS {
        let dom = &boxes[k % 2];
        let x = draw(&mut rng, dom, 0.499);
        let y = draw(&mut rng, dom, 0.499);
        let run = || -> crate::Result<Vec<(f64, f64)>> {
            let lhs = x.geom_inverse(1.0)?.mul(&y.geom_inverse(1.0)?)?;
            let rhs = x.add(&y)?.geom_inverse(1.0)?;
            Ok(pairs(&lhs, &rhs))
        };
        match run() {
            Ok(p) => product_bound.bound(&p),
            Err(e) => product_bound.fail(e.to_string()),
        }
    }
    suite.push(product_bound);

    let mut sum_bound = Check::new("inverse_sum_dominated_by_product", 0.0);
    let mut rng = sample::rng(seed, 0x42);
    for k in 0..PAIRS {
        let dom = &boxes[k % 2];
        let x = draw(&mut rng, dom, 0.2499);
        let y = draw(&mut rng, dom, 0.2499);
        let run = || -> crate::Result<Vec<(f64, f64)>> {
            let n = dom.n_of() as i32;
            let lhs = x.add(&y)?.geom_inverse(1.0)?;
            let rhs = x.geom_inverse(1.0)?.mul(&y.geom_inverse(1.0)?)?.scale(2f64.powi(2 * n - 1));
            Ok(pairs(&lhs, &rhs))
        };
        match run() {
            Ok(p) => sum_bound.bound(&p),
            Err(e) => sum_bound.fail(e.to_string()),
        }
    }
    suite.push(sum_bound);

    let mut quotient = Check::new("quotient_majorant_closed_form", 0.0);
    for dom in &boxes {
        let d = dom.dim();
        for a in [0.1, 1.0, 3.0] {
            for lam in [0.0, 0.25, 0.5] {
                let h = Majorant::quotient(Majorant::GeomProduct { a, p: 2 }, Majorant::ScaledGeom { lam, a });
                match h.series(dom) {
                    Ok(lhs) => {
                        let rhs = NormElement::from_fn(dom.clone(), |m| {
                            16.0 / 3.0 * (4.0 * (d as f64 + 1.0) * a).powi(m.len_total() as i32)
                        });
                        quotient.bound(&pairs(&lhs, &rhs));
                    }
                    Err(e) => quotient.fail(e.to_string()),
                }
            }
        }
    }
    suite.push(quotient);

    let mut analytic = Check::new("analytic_function_bound", 0.0);
    let mut rng = sample::rng(seed, 0x47);
    for k in 0..PAIRS {
        let dom = &boxes[k % 2];
        let f = if k % 4 < 2 { ScalarSeries::Exp } else { ScalarSeries::Geometric };
        let beta = rng.gen_range(0.2..1.5);
        let x = draw(&mut rng, dom, (0.99 / beta as f64).min(0.9));
        let run = || -> crate::Result<Vec<(f64, f64)>> {
            let c = majorant_constant(f, &x, beta)?;
            let lhs = f.apply_to_order(&x, dom.n_of())?;
            let rhs = x.scale(beta).geom_inverse(1.0)?.scale(c);
            Ok(pairs(&lhs, &rhs))
        };
        match run() {
            Ok(p) => analytic.bound(&p),
            Err(e) => analytic.fail(e.to_string()),
        }
    }
    suite.push(analytic);
    suite
}
