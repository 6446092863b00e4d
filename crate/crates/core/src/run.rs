//! The four run modes. Each returns a JSON report, the flat tables behind it
//! and an overall property verdict; writing files is left to the caller.

use std::sync::Arc;

use num_complex::Complex64;
use serde_json::{json, Value};

use crate::config::{Config, Mode};
use crate::error::Result;
use crate::grassmann::{s_empirical, CovarianceMatrix};
use crate::insulator::{
    deviation_norms, g_gamma_e, greens, k_kernel, scaling_study, smallness_check, upsilon,
    v0_from_potential,
};
use crate::kernel::{Kernel, SeminormOptions};
use crate::lattice::Lattice;
use crate::norm::{NormElement, SaturatedSet};
use crate::propagator::{measured_ratio, Measure, Variant};
use crate::report::{cell, manifest, real_value, Table};
use crate::verify::{self, contraction_constant, Suite};

/// Moment tuples sampled by `S(C)` estimates beyond the exhaustive limit.
pub const S_SAMPLES: usize = 2000;
/// Largest refined lattice the bounds report builds for the stability check.
pub const REFINE_MAX_POINTS: usize = 512;
pub const ALPHA: f64 = 2.0;
pub const IDENTITY_TOLERANCE: f64 = 1e-8;
pub const SLOPE_TOLERANCE: f64 = 0.05;

#[derive(Clone, Debug)]
pub struct Outcome {
    pub mode: Mode,
    pub report: Value,
    pub tables: Vec<Table>,
    pub passed: bool,
}

pub fn run(cfg: &Config, mode: Mode, seed: u64, epsilon: f64) -> Result<Outcome> {
    match mode {
        Mode::Verify => Ok(run_verify(cfg, seed, epsilon)),
        Mode::Bounds => run_bounds(cfg, seed, epsilon),
        Mode::Greens => run_greens(cfg, seed, epsilon),
        Mode::Scaling => run_scaling(cfg, seed, epsilon),
    }
}

/// Every property suite, in a fixed order.
pub fn all_suites(cfg: &Config, seed: u64) -> Vec<Suite> {
    vec![
        verify::norm_suite(seed),
        verify::kernel_suite(seed),
        verify::grassmann_suite(seed),
        verify::integral_bound_suite(seed),
        verify::contraction_bound_suite(seed),
        verify::rg_map_suite(seed),
        verify::propagator_suite(seed),
        verify::quadrature_suite(),
        verify::insulator_suite(&cfg.potential),
    ]
}

fn run_verify(cfg: &Config, seed: u64, epsilon: f64) -> Outcome {
    let suites = all_suites(cfg, seed);
    let mut table = Table::new("verify", &["suite", "check", "passed", "cases", "worst", "threshold", "tightness"]);
    for s in &suites {
        for c in &s.checks {
            table.push(vec![
                s.name.to_string(),
                c.name.clone(),
                c.passed.to_string(),
                c.cases.to_string(),
                cell(c.worst),
                cell(c.threshold),
                c.tightness.map(cell).unwrap_or_default(),
            ]);
        }
    }
    let passed = suites.iter().all(Suite::passed);
    let report = json!({
        "manifest": manifest(cfg, Mode::Verify, seed, epsilon, json!({})),
        "passed": passed,
        "suites": suites.iter().map(Suite::to_json).collect::<Vec<_>>(),
    });
    Outcome { mode: Mode::Verify, report, tables: vec![table], passed }
}

fn report_domain(cfg: &Config) -> Arc<SaturatedSet> {
    Arc::new(SaturatedSet::boxed(cfg.lattice.d, cfg.spec.r0, cfg.spec.r))
}

fn ratio_json(rows: Vec<(crate::norm::MultiIndex, Option<f64>)>) -> Value {
    Value::Array(rows.into_iter().map(|(m, r)| json!({"delta": m.0, "ratio": r.map(real_value)})).collect())
}

fn run_bounds(cfg: &Config, seed: u64, epsilon: f64) -> Result<Outcome> {
    let spec = &cfg.spec;
    let lat = &cfg.lattice;
    let tr = &cfg.raw.truncation;
    let lam = cfg.raw.interaction.lambda;
    let dom = report_domain(cfg);
    let opts = SeminormOptions { delta_max: tr.delta_max };

    let (g, gamma, big_e) = g_gamma_e(spec);
    let g_refined = spec.clone().with_quad(spec.quad.refined()).g1_g2().0;
    let c = spec.c_position(lat)?;
    let v = v0_from_potential(&cfg.potential, lat)?.scale(Complex64::new(lam, 0.0));
    let ups = upsilon(&v, spec.mu, spec.r, spec.r0, tr.delta_max);

    let points: Vec<usize> = (0..lat.npts()).collect();
    let cov = CovarianceMatrix::from_kernel(&c, &points)?;
    let s = s_empirical(&cov, tr.m_max, S_SAMPLES, seed)?;
    let b = 2.0 * s.value;
    let gram = spec.gram_bound();
    let s_bound = spec.s_bound_gapped(&Measure::Lattice(lat.clone()))?;

    let frak = contraction_constant(&c, &dom)?;
    let v_norm = v.seminorm_1inf(&dom, opts);
    let n_value = frak.mul(&v_norm)?.scale(ALPHA.powi(4) * b * b);
    let v_scalar = v.norm_1inf_scalar();
    let small = smallness_check(v_scalar, ups.value, g, gamma, spec.mu, lat.d, epsilon);

    let c_norm = c.seminorm_1inf(&dom, opts);
    let ints = spec.derivative_integrals(&dom);
    let check_norm = NormElement::from_fn(dom.clone(), |m| ints.get(m) / m.factorial());
    let t_mu = check_norm.t_mu(spec.mu)?;
    let shape = spec.contraction_element(&dom, Variant::Gapped);

    let refined_npts = lat.npts() * (1 << (lat.d + 1));
    let refinement = if refined_npts <= REFINE_MAX_POINTS {
        let fine = Arc::new(Lattice::new(lat.d, 2 * lat.l, 2 * lat.t, lat.dx[0], lat.dt)?);
        let fine_c = spec.c_position(&fine)?;
        let a = frak.constant_term();
        let f = contraction_constant(&fine_c, &dom)?.constant_term();
        json!({"L": 2 * lat.l, "T": 2 * lat.t, "frak_c_0": real_value(a), "frak_c_0_refined": real_value(f),
               "relative_change": real_value((f - a).abs() / a.abs().max(f64::MIN_POSITIVE))})
    } else {
        json!({"skipped": format!("refined lattice would have {refined_npts} points")})
    };

    let scalars = [g, gamma, big_e, spec.mu, ups.value, b, frak.constant_term()];
    let passed = scalars.iter().all(|x| x.is_finite() && *x >= 0.0);
    let quad = json!({"gram_bound": real_value(gram.error), "g_refinement": real_value((g_refined - g).abs())});
    let report = json!({
        "manifest": manifest(cfg, Mode::Bounds, seed, epsilon, quad),
        "passed": passed,
        "g": real_value(g),
        "gamma": real_value(gamma),
        "E": real_value(big_e),
        "mu": real_value(spec.mu),
        "upsilon": {"value": real_value(ups.value), "argmax": ups.argmax.0, "capped": ups.capped, "delta_max": tr.delta_max},
        "b": real_value(b),
        "s_empirical": {"value": real_value(s.value), "exhaustive": s.exhaustive, "m_max": s.m_max, "tuples": s.tuples},
        "s_bounds": {"gram": real_value(gram.value), "gapped_sqrt": real_value(s_bound.total.sqrt())},
        "frak_c": frak.to_json(),
        "n_value": {"alpha": real_value(ALPHA), "value": n_value.to_json()},
        "smallness": {
            "threshold": real_value(small.threshold),
            "v0_norm": real_value(small.v0_norm),
            "upsilon": real_value(small.upsilon),
            "part_i": small.part_i,
            "part_ii": small.part_ii,
        },
        "measured_constants": {
            "t_mu": ratio_json(measured_ratio(&c_norm, &t_mu)),
            "contraction_element": ratio_json(measured_ratio(&frak, &shape)),
        },
        "grid_refinement": refinement,
    });
    let mut table = Table::new("bounds", &["quantity", "value"]);
    for (name, x) in ["g", "gamma", "E", "mu", "upsilon", "b", "frak_c_0"].iter().zip(scalars) {
        table.push(vec![name.to_string(), cell(x)]);
    }
    table.push(vec!["smallness_threshold".into(), cell(small.threshold)]);
    table.push(vec!["smallness_part_i".into(), small.part_i.to_string()]);
    table.push(vec!["smallness_part_ii".into(), small.part_ii.to_string()]);
    Ok(Outcome { mode: Mode::Bounds, report, tables: vec![table], passed })
}

/// Largest deviation of a `2n`-point kernel from antisymmetry under adjacent
/// swaps among the `ψ̄` slots and among the `ψ` slots.
fn antisymmetry_defect(f: &Kernel) -> f64 {
    let arity = f.n();
    let mut worst: f64 = 0.0;
    for (key, v) in f.entries() {
        let p = crate::kernel::unpack(key, arity);
        for a in 0..arity.saturating_sub(2) {
            let mut q = p;
            q.swap(a, a + 2);
            worst = worst.max((v + f.get(&q[..arity])).norm());
        }
    }
    worst
}

fn rel(a: &Kernel, b: &Kernel) -> Result<f64> {
    let d = a.max_abs_diff(b)?;
    let s = b.max_abs();
    Ok(if s == 0.0 { d } else { d / s })
}

fn run_greens(cfg: &Config, seed: u64, epsilon: f64) -> Result<Outcome> {
    let spec = &cfg.spec;
    let lat = &cfg.lattice;
    let tr = &cfg.raw.truncation;
    let lam = cfg.raw.interaction.lambda;
    let v0 = v0_from_potential(&cfg.potential, lat)?;
    let c = spec.c_position(lat)?;
    let set = greens(&v0, &c, tr.lambda_order)?;
    let k = k_kernel(&v0, &c)?;

    let mut summary = Table::new("greens", &["order", "points", "max_abs", "norm_1inf", "antisymmetry_defect"]);
    let mut orders = Vec::new();
    for (order, row) in set.orders.iter().enumerate() {
        for (i, kern) in row.iter().enumerate() {
            let n = i + 1;
            summary.push(vec![
                order.to_string(),
                (2 * n).to_string(),
                cell(kern.max_abs()),
                cell(kern.norm_1inf_scalar()),
                cell(antisymmetry_defect(kern)),
            ]);
            orders.push(json!({
                "order": order,
                "points": 2 * n,
                "max_abs": real_value(kern.max_abs()),
                "norm_1inf": real_value(kern.norm_1inf_scalar()),
                "antisymmetry_defect": real_value(antisymmetry_defect(kern)),
            }));
        }
    }

    let order0 = (1..=3).map(|n| set.coefficient(0, n).max_abs()).fold(0.0, f64::max);
    let g2 = rel(set.coefficient(1, 1), &k)?;
    let g4 = rel(set.coefficient(1, 2), &v0)?;
    let g6 = set.coefficient(1, 3).max_abs() / v0.max_abs().max(f64::MIN_POSITIVE);
    let passed = order0 == 0.0 && g2 <= IDENTITY_TOLERANCE && g4 <= IDENTITY_TOLERANCE && g6 <= IDENTITY_TOLERANCE;

    let (g, gamma, _) = g_gamma_e(spec);
    let l = Complex64::new(lam, 0.0);
    let v = v0.scale(l);
    let ups = upsilon(&v, spec.mu, spec.r, spec.r0, tr.delta_max);
    let deltas = SaturatedSet::total_degree(lat.d, 1).members().to_vec();
    let rows = deviation_norms(
        &set.at(lam, 1)?,
        &set.at(lam, 2)?,
        &set.at(lam, 3)?,
        &k.scale(l),
        &v,
        &deltas,
        (g, gamma, ups.value, spec.mu),
    )?;
    let mut dev = Table::new("deviations", &["channel", "delta", "value", "shape", "measured_constant"]);
    let mut dev_json = Vec::new();
    for r in &rows {
        dev.push(vec![r.channel.into(), r.delta.to_string(), cell(r.value), cell(r.shape), cell(r.measured_constant)]);
        dev_json.push(json!({
            "channel": r.channel,
            "delta": r.delta.0,
            "value": real_value(r.value),
            "shape": real_value(r.shape),
            "measured_constant": real_value(r.measured_constant),
        }));
    }
    let report = json!({
        "manifest": manifest(cfg, Mode::Greens, seed, epsilon, json!({})),
        "passed": passed,
        "lambda": real_value(lam),
        "lambda_order": tr.lambda_order,
        "normalization": "G_2n carries slot conjugations (1,0,..,1,0); generating functional weights 1/(n!)^2",
        "charge_violation": real_value(set.charge_violation),
        "orders": orders,
        "first_order": {
            "order0_max": real_value(order0),
            "g2_vs_k": real_value(g2),
            "g4_vs_v0": real_value(g4),
            "g6_max": real_value(g6),
            "tolerance": real_value(IDENTITY_TOLERANCE),
        },
        "deviations": dev_json,
    });
    Ok(Outcome { mode: Mode::Greens, report, tables: vec![summary, dev], passed })
}

fn run_scaling(cfg: &Config, seed: u64, epsilon: f64) -> Result<Outcome> {
    let lat = &cfg.lattice;
    let lams = &cfg.raw.interaction.lambdas;
    let v0 = v0_from_potential(&cfg.potential, lat)?;
    let c = cfg.spec.c_position(lat)?;
    let set = greens(&v0, &c, cfg.raw.truncation.lambda_order)?;
    let k = k_kernel(&v0, &c)?;
    let fits = scaling_study(&set, &k, &v0, lams)?;
    let mut table = Table::new("scaling", &["channel", "slope", "within_tolerance"]);
    let mut rows = Vec::new();
    let mut passed = true;
    for f in &fits {
        let ok = (f.slope - 2.0).abs() <= SLOPE_TOLERANCE;
        passed &= ok;
        table.push(vec![f.channel.into(), cell(f.slope), ok.to_string()]);
        rows.push(json!({
            "channel": f.channel,
            "slope": real_value(f.slope),
            "within_tolerance": ok,
            "norms": f.norms.iter().map(|&x| real_value(x)).collect::<Vec<_>>(),
        }));
    }
    let report = json!({
        "manifest": manifest(cfg, Mode::Scaling, seed, epsilon, json!({})),
        "passed": passed,
        "lambdas": lams.iter().map(|&l| real_value(l)).collect::<Vec<_>>(),
        "expected_slope": real_value(2.0),
        "tolerance": real_value(SLOPE_TOLERANCE),
        "channels": rows,
    });
    Ok(Outcome { mode: Mode::Scaling, report, tables: vec![table], passed })
}
