//! Strict JSON run configuration. Every section and field is optional and
//! falls back to the desk-scale defaults listed on each field; unknown keys are
//! rejected with the offending field path.

use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::insulator::Potential;
use crate::lattice::Lattice;
use crate::propagator::{Chi, Cutoff, Dispersion, PropagatorSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Verify,
    Bounds,
    Greens,
    Scaling,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Verify => "verify",
            Mode::Bounds => "bounds",
            Mode::Greens => "greens",
            Mode::Scaling => "scaling",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LatticeSection {
    /// Spatial dimension, default 1.
    pub d: usize,
    /// Sites per spatial axis, default 4.
    #[serde(rename = "L")]
    pub l: usize,
    /// Time slices, default 4.
    #[serde(rename = "T")]
    pub t: usize,
    /// Spatial spacing, default 1.
    pub dx: f64,
    /// Time spacing, default 0.5.
    pub dt: f64,
}

impl Default for LatticeSection {
    fn default() -> Self {
        LatticeSection { d: 1, l: 4, t: 4, dx: 1.0, dt: 0.5 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DispersionType {
    Constant,
    Cosine,
    Quadratic,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DispersionSection {
    /// `constant`, `cosine` (default) or `quadratic`.
    #[serde(rename = "type")]
    pub kind: DispersionType,
    /// Type-specific parameters; cosine defaults to the filled band
    /// `c0 = -2`, `c = [-1, ..]`.
    pub params: Value,
    /// Gap on the support of the cutoff, default 1.
    pub mu: f64,
}

impl Default for DispersionSection {
    fn default() -> Self {
        DispersionSection { kind: DispersionType::Cosine, params: json!({}), mu: 1.0 }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstantParams {
    lambda: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, default)]
struct CosineParams {
    c0: f64,
    c: Option<Vec<f64>>,
}

impl Default for CosineParams {
    fn default() -> Self {
        CosineParams { c0: -2.0, c: None }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct QuadraticParams {
    gap: f64,
    a: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CutoffType {
    Unit,
    Bump,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CutoffSection {
    /// `unit` (default) or `bump`.
    #[serde(rename = "type")]
    pub kind: CutoffType,
    /// `bump` needs `inner` and `outer`.
    pub params: Value,
    /// Optional `{amp, inner, outer}`.
    pub chi: Option<ChiSection>,
}

impl Default for CutoffSection {
    fn default() -> Self {
        CutoffSection { kind: CutoffType::Unit, params: json!({}), chi: None }
    }
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChiSection {
    pub amp: f64,
    pub inner: f64,
    pub outer: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BumpParams {
    inner: f64,
    outer: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EmptyParams {}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PotentialType {
    Onsite,
    Exponential,
    Yukawa,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InteractionSection {
    /// `onsite`, `exponential` (default) or `yukawa`.
    #[serde(rename = "type")]
    pub kind: PotentialType,
    /// `onsite` takes `u`; the others `amp` and `range` (default 1 and 1).
    pub params: Value,
    /// Coupling used by `bounds` and `greens`, default 0.01.
    pub lambda: f64,
    /// Couplings of the `scaling` fit, default five points in `[1e-3, 1e-1]`.
    pub lambdas: Vec<f64>,
}

impl Default for InteractionSection {
    fn default() -> Self {
        InteractionSection {
            kind: PotentialType::Exponential,
            params: json!({}),
            lambda: 0.01,
            lambdas: vec![1e-3, 3e-3, 1e-2, 3e-2, 1e-1],
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OnsiteParams {
    u: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RangeParams {
    amp: f64,
    range: f64,
}

impl Default for RangeParams {
    fn default() -> Self {
        RangeParams { amp: 1.0, range: 1.0 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TruncationSection {
    /// Spatial differentiability budget, default 4.
    pub r: u32,
    /// Temporal differentiability budget, default 4.
    pub r0: u32,
    /// Largest `|δ|` enumerated by decay-operator sups, default 4.
    pub delta_max: u32,
    /// λ-order of the Green's function expansion, default 2.
    pub lambda_order: usize,
    /// Largest moment order in `S(C)` estimates, default 6.
    pub m_max: usize,
}

impl Default for TruncationSection {
    fn default() -> Self {
        TruncationSection { r: 4, r0: 4, delta_max: 4, lambda_order: 2, m_max: 6 }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    /// Used when the command line names no mode.
    pub mode: Option<Mode>,
    /// Root seed, default 1.
    pub seed: u64,
    /// Smallness parameter of the bounds report, default 0.1.
    pub epsilon: f64,
    /// Output directory, default `out`.
    pub out: String,
    /// `json` (default) or `csv`.
    pub format: Format,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection { mode: None, seed: 1, epsilon: 0.1, out: "out".into(), format: Format::Json }
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RawConfig {
    pub lattice: LatticeSection,
    pub dispersion: DispersionSection,
    pub cutoff: CutoffSection,
    pub interaction: InteractionSection,
    pub truncation: TruncationSection,
    pub run: RunSection,
}

/// Validated configuration.
#[derive(Clone, Debug)]
pub struct Config {
    pub raw: RawConfig,
    /// SHA-256 of the canonical (key-sorted, compact) config document.
    pub digest: String,
    pub lattice: Arc<Lattice>,
    pub spec: PropagatorSpec,
    pub potential: Potential,
}

fn path_text(path: &serde_path_to_error::Path) -> String {
    let s = path.to_string();
    if s == "." {
        String::new()
    } else {
        s
    }
}

fn join(prefix: &str, rest: &str) -> String {
    match (prefix.is_empty(), rest.is_empty()) {
        (true, _) => rest.to_string(),
        (_, true) => prefix.to_string(),
        _ => format!("{prefix}.{rest}"),
    }
}

fn typed<T: DeserializeOwned>(v: &Value, prefix: &str) -> Result<T> {
    serde_path_to_error::deserialize(v.clone()).map_err(|e| {
        let path = join(prefix, &path_text(e.path()));
        Error::config(path, e.into_inner().to_string())
    })
}

/// Sort object keys recursively so equal documents serialize identically.
pub fn canonical(v: &Value) -> Value {
    match v {
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            let mut out = serde_json::Map::new();
            for k in keys {
                out.insert(k.clone(), canonical(&map[k]));
            }
            Value::Object(out)
        }
        Value::Array(a) => Value::Array(a.iter().map(canonical).collect()),
        other => other.clone(),
    }
}

pub fn digest(v: &Value) -> String {
    let text = serde_json::to_string(&canonical(v)).expect("values serialize");
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn load_config(path: &Path) -> Result<Config> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config("", format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<Config> {
    let doc: Value = serde_json::from_str(text).map_err(|e| Error::config("", format!("invalid JSON: {e}")))?;
    if !doc.is_object() {
        return Err(Error::config("", "config must be a JSON object"));
    }
    let raw: RawConfig = typed(&doc, "")?;
    let digest = digest(&doc);
    validate(raw, digest)
}

fn check(ok: bool, path: &str, message: impl Into<String>) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::config(path, message))
    }
}

fn validate(raw: RawConfig, digest: String) -> Result<Config> {
    let lat = &raw.lattice;
    check(lat.d >= 1, "lattice.d", "must be at least 1")?;
    check(lat.l >= 1, "lattice.L", "must be at least 1")?;
    check(lat.t >= 1, "lattice.T", "must be at least 1")?;
    check(lat.dx > 0.0 && lat.dx.is_finite(), "lattice.dx", "must be positive")?;
    check(lat.dt > 0.0 && lat.dt.is_finite(), "lattice.dt", "must be positive")?;
    let lattice =
        Arc::new(Lattice::new(lat.d, lat.l, lat.t, lat.dx, lat.dt).map_err(|e| Error::config("lattice", e.to_string()))?);

    let disp = &raw.dispersion;
    let dispersion = match disp.kind {
        DispersionType::Constant => {
            let p: ConstantParams = typed(&disp.params, "dispersion.params")?;
            Dispersion::Constant { lambda: p.lambda }
        }
        DispersionType::Cosine => {
            let p: CosineParams = typed(&disp.params, "dispersion.params")?;
            let c = p.c.unwrap_or_else(|| vec![-1.0; lat.d]);
            check(c.len() == lat.d, "dispersion.params.c", format!("needs {} amplitudes, one per axis", lat.d))?;
            Dispersion::Cosine { c0: p.c0, c }
        }
        DispersionType::Quadratic => {
            let p: QuadraticParams = typed(&disp.params, "dispersion.params")?;
            Dispersion::Quadratic { gap: p.gap, a: p.a }
        }
    };
    check(disp.mu > 0.0 && disp.mu.is_finite(), "dispersion.mu", "must be positive")?;

    let cut = &raw.cutoff;
    let cutoff = match cut.kind {
        CutoffType::Unit => {
            let _: EmptyParams = typed(&cut.params, "cutoff.params")?;
            Cutoff::Unit
        }
        CutoffType::Bump => {
            let p: BumpParams = typed(&cut.params, "cutoff.params")?;
            check(p.inner >= 0.0 && p.inner < p.outer, "cutoff.params.inner", "needs 0 <= inner < outer")?;
            check(p.outer <= PI / lat.dx, "cutoff.params.outer", "must not exceed pi/dx")?;
            Cutoff::Bump { inner: p.inner, outer: p.outer }
        }
    };
    let chi = match cut.chi {
        Some(c) => {
            check((0.0..=1.0).contains(&c.amp), "cutoff.chi.amp", "must lie in [0, 1]")?;
            check(c.inner >= 0.0 && c.inner < c.outer, "cutoff.chi.inner", "needs 0 <= inner < outer")?;
            Some(Chi { amp: c.amp, inner: c.inner, outer: c.outer })
        }
        None => None,
    };

    let tr = &raw.truncation;
    check(
        (1..=crate::insulator::MAX_LAMBDA_ORDER).contains(&tr.lambda_order),
        "truncation.lambda_order",
        format!("must lie in 1..={}", crate::insulator::MAX_LAMBDA_ORDER),
    )?;
    check(tr.m_max >= 2 && tr.m_max % 2 == 0, "truncation.m_max", "must be an even number >= 2")?;
    check(tr.m_max <= lattice.npts(), "truncation.m_max", "exceeds the number of base points")?;
    check(tr.delta_max <= 8, "truncation.delta_max", "must not exceed 8")?;

    let spec = PropagatorSpec::new(
        lat.d,
        dispersion,
        cutoff,
        chi,
        None,
        disp.mu,
        tr.r,
        tr.r0,
        vec![lat.dx; lat.d],
    )
    .map_err(|e| {
        let path = if e.to_string().contains("gap") { "dispersion.mu" } else { "dispersion" };
        Error::config(path, e.to_string())
    })?;

    let int = &raw.interaction;
    let potential = match int.kind {
        PotentialType::Onsite => {
            let p: OnsiteParams = typed(&int.params, "interaction.params")?;
            Potential::OnSite { u: p.u }
        }
        PotentialType::Exponential => {
            let p: RangeParams = typed(&int.params, "interaction.params")?;
            check(p.range > 0.0, "interaction.params.range", "must be positive")?;
            Potential::Exponential { amp: p.amp, range: p.range }
        }
        PotentialType::Yukawa => {
            let p: RangeParams = typed(&int.params, "interaction.params")?;
            check(p.range > 0.0, "interaction.params.range", "must be positive")?;
            Potential::Yukawa { amp: p.amp, range: p.range }
        }
    };
    check(int.lambda.is_finite(), "interaction.lambda", "must be finite")?;
    check(int.lambdas.len() >= 2, "interaction.lambdas", "needs at least two couplings")?;
    for (i, l) in int.lambdas.iter().enumerate() {
        check(*l > 0.0 && l.is_finite(), &format!("interaction.lambdas[{i}]"), "must be positive")?;
    }
    check(raw.run.epsilon > 0.0 && raw.run.epsilon.is_finite(), "run.epsilon", "must be positive")?;
    Ok(Config { raw, digest, lattice, spec, potential })
}

impl Config {
    /// Echo of the validated values, as recorded in report manifests.
    pub fn to_json(&self) -> Value {
        json!({
            "lattice": self.lattice.to_json(),
            "propagator": self.spec.to_json(),
            "potential": self.potential.to_json(),
            "lambda": crate::report::real_value(self.raw.interaction.lambda),
            "lambdas": self.raw.interaction.lambdas.iter().map(|&l| crate::report::real_value(l)).collect::<Vec<_>>(),
            "truncation": serde_json::to_value(&self.raw.truncation).expect("plain struct"),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_the_desk_default() {
        let c = parse_config("{}").unwrap();
        assert_eq!(c.lattice.npts(), 64);
        assert_eq!(c.spec.dispersion, Dispersion::Cosine { c0: -2.0, c: vec![-1.0] });
        assert_eq!(c.potential, Potential::Exponential { amp: 1.0, range: 1.0 });
        assert_eq!(c.raw.run.seed, 1);
    }

    #[test]
    fn digest_ignores_key_order() {
        let a = parse_config(r#"{"lattice": {"L": 4, "T": 2}, "run": {"seed": 3}}"#).unwrap();
        let b = parse_config(r#"{"run": {"seed": 3}, "lattice": {"T": 2, "L": 4}}"#).unwrap();
        assert_eq!(a.digest, b.digest);
        let c = parse_config(r#"{"run": {"seed": 4}, "lattice": {"T": 2, "L": 4}}"#).unwrap();
        assert_ne!(a.digest, c.digest);
    }

    fn path_of(text: &str) -> String {
        match parse_config(text) {
            Err(Error::Config { path, .. }) => path,
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_keys_are_rejected_with_paths() {
        assert_eq!(path_of(r#"{"lattice": {"L": 4, "bogus": 1}}"#), "lattice.bogus");
        assert_eq!(path_of(r#"{"extra": {}}"#), "extra");
        assert_eq!(path_of(r#"{"dispersion": {"params": {"c0": 2, "k": 1}}}"#), "dispersion.params.k");
    }

    #[test]
    fn type_errors_carry_paths() {
        assert_eq!(path_of(r#"{"lattice": {"L": "four"}}"#), "lattice.L");
        assert_eq!(path_of(r#"{"run": {"format": "xml"}}"#), "run.format");
        assert_eq!(path_of(r#"{"dispersion": {"type": "constant", "params": {}}}"#), "dispersion.params");
    }

    #[test]
    fn semantic_checks_carry_paths() {
        assert_eq!(path_of(r#"{"dispersion": {"mu": 5.0}}"#), "dispersion.mu");
        assert_eq!(path_of(r#"{"dispersion": {"params": {"c": [1, 2]}}}"#), "dispersion.params.c");
        assert_eq!(path_of(r#"{"interaction": {"lambdas": [0.1, -1]}}"#), "interaction.lambdas[1]");
        assert_eq!(path_of(r#"{"truncation": {"lambda_order": 5}}"#), "truncation.lambda_order");
        assert_eq!(path_of(r#"{"cutoff": {"type": "bump", "params": {"inner": 1, "outer": 9}}}"#), "cutoff.params.outer");
        assert_eq!(path_of("[1]"), "");
    }
}
