//! Property suites behind the `verify` mode. Each suite is a pure function of
//! its seed and returns one record per property.

use serde_json::{json, Value};

use crate::norm::NormElement;
use crate::report::real_value;

mod bounds;
mod grassmann;
mod insulator;
mod kernel;
mod norm;
mod propagator;

pub use bounds::{contraction_bound_suite, contraction_constant, integral_bound_suite, rg_map_suite};
pub use grassmann::grassmann_suite;
pub use insulator::insulator_suite;
pub use kernel::kernel_suite;
pub use norm::norm_suite;
pub use propagator::{propagator_suite, quadrature_suite};

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub cases: usize,
    /// Largest observed violation measure (error, or lhs/rhs ratio).
    pub worst: f64,
    pub threshold: f64,
    /// Largest finite `lhs / rhs` seen by inequality cases.
    pub tightness: Option<f64>,
    pub note: Option<String>,
}

impl Check {
    pub fn new(name: impl Into<String>, threshold: f64) -> Self {
        Check { name: name.into(), passed: true, cases: 0, worst: 0.0, threshold, tightness: None, note: None }
    }

    /// Record one case whose measure must not exceed the threshold.
    pub fn observe(&mut self, measure: f64) {
        self.cases += 1;
        if measure.is_nan() || measure > self.threshold {
            self.passed = false;
        }
        if measure.is_nan() || measure > self.worst {
            self.worst = measure;
        }
    }

    /// Record one inequality case made of `(lhs, rhs)` pairs, each required
    /// to satisfy `lhs ≤ rhs`.
    pub fn bound(&mut self, pairs: &[(f64, f64)]) {
        let mut worst: f64 = 0.0;
        for &(a, b) in pairs {
            if b > 0.0 && b.is_finite() && a.is_finite() {
                let r = a / b;
                self.tightness = Some(self.tightness.map_or(r, |t| t.max(r)));
            }
            let e = excess(a, b);
            if e.is_nan() || e > worst {
                worst = e;
            }
        }
        self.observe(worst);
    }

    /// Record one boolean case; `worst` counts failures.
    pub fn expect(&mut self, ok: bool) {
        self.cases += 1;
        if !ok {
            self.passed = false;
            self.worst += 1.0;
        }
    }

    pub fn fail(&mut self, why: impl Into<String>) {
        self.passed = false;
        self.note = Some(why.into());
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn to_json(&self) -> Value {
        json!({
            "name": self.name,
            "passed": self.passed,
            "cases": self.cases,
            "worst": real_value(self.worst),
            "threshold": real_value(self.threshold),
            "tightness": self.tightness.map(real_value),
            "note": self.note,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Suite {
    pub name: &'static str,
    pub checks: Vec<Check>,
    pub skipped: Vec<(String, String)>,
}

impl Suite {
    pub fn new(name: &'static str) -> Self {
        Suite { name, checks: Vec::new(), skipped: Vec::new() }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn push(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "suite": self.name,
            "passed": self.passed(),
            "checks": self.checks.iter().map(Check::to_json).collect::<Vec<_>>(),
            "skipped": self.skipped.iter().map(|(n, why)| json!({"name": n, "reason": why})).collect::<Vec<_>>(),
        })
    }
}

/// Relative violation of `lhs ≤ rhs`: 0 when it holds, otherwise
/// `(lhs - rhs) / |rhs|` (or `+inf` when `rhs` vanishes).
pub fn excess(lhs: f64, rhs: f64) -> f64 {
    if lhs <= rhs {
        0.0
    } else if rhs.is_infinite() {
        0.0
    } else if rhs == 0.0 {
        f64::INFINITY
    } else {
        (lhs - rhs) / rhs.abs()
    }
}

/// Coefficient pairs of two elements over a common domain.
pub fn pairs(lhs: &NormElement, rhs: &NormElement) -> Vec<(f64, f64)> {
    lhs.coeffs().iter().copied().zip(rhs.coeffs().iter().copied()).collect()
}
