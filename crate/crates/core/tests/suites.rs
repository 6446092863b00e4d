use std::time::Instant;

use fermion_rg::verify::{self, Suite};

fn run(name: &str, f: impl FnOnce() -> Suite) -> Suite {
    let t = Instant::now();
    let s = f();
    eprintln!("{name}: {:.2}s", t.elapsed().as_secs_f64());
    for c in &s.checks {
        eprintln!("  {} passed={} cases={} worst={:e} tight={:?} note={:?}", c.name, c.passed, c.cases, c.worst, c.tightness, c.note);
    }
    s
}

#[test]
fn norm_suite_passes() {
    assert!(run("norm", || verify::norm_suite(7)).passed());
}

#[test]
fn kernel_suite_passes() {
    assert!(run("kernel", || verify::kernel_suite(7)).passed());
}

#[test]
fn grassmann_suite_passes() {
    assert!(run("grassmann", || verify::grassmann_suite(7)).passed());
}

#[test]
fn integral_bound_suite_passes() {
    assert!(run("integral", || verify::integral_bound_suite(7)).passed());
}

#[test]
fn contraction_bound_suite_passes() {
    assert!(run("contraction", || verify::contraction_bound_suite(7)).passed());
}

#[test]
fn rg_map_suite_passes() {
    assert!(run("rg", || verify::rg_map_suite(7)).passed());
}

#[test]
fn propagator_suite_passes() {
    assert!(run("propagator", || verify::propagator_suite(7)).passed());
}

#[test]
fn quadrature_suite_passes() {
    assert!(run("quadrature", verify::quadrature_suite).passed());
}

#[test]
fn insulator_suite_passes() {
    let v = fermion_rg::insulator::Potential::Exponential { amp: 1.0, range: 1.0 };
    assert!(run("insulator", || verify::insulator_suite(&v)).passed());
}
