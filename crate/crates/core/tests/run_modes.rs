use std::f64::consts::PI;

use fermion_rg::config::{parse_config, Mode};
use fermion_rg::norm::NormElement;
use fermion_rg::report::{parse_real, to_json_text};
use fermion_rg::run::run;

const COSINE_BAND: &str = r#"{
  "dispersion": {"type": "cosine", "params": {"c0": 2.0, "c": [1.0]}, "mu": 1.0},
  "lattice": {"L": 4, "T": 2}
}"#;

#[test]
fn bounds_on_cosine_band_reports_g() {
    let cfg = parse_config(COSINE_BAND).unwrap();
    let out = run(&cfg, Mode::Bounds, 1, 0.1).unwrap();
    assert!(out.passed);
    let g = parse_real(&out.report["g"]).unwrap();
    assert!((g - 2.0 * PI / 3f64.sqrt()).abs() < 1e-8, "{g}");
    assert_eq!(parse_real(&out.report["E"]), Some(3.0));
    let frak = NormElement::from_json(&out.report["frak_c"]).unwrap();
    assert!(frak.constant_term() > 0.0);
    assert_eq!(out.report["manifest"]["config_digest"], cfg.digest.as_str());
}

#[test]
fn bounds_report_is_deterministic() {
    let cfg = parse_config(COSINE_BAND).unwrap();
    let a = run(&cfg, Mode::Bounds, 5, 0.1).unwrap();
    let b = run(&cfg, Mode::Bounds, 5, 0.1).unwrap();
    assert_eq!(to_json_text(&a.report), to_json_text(&b.report));
    let text = to_json_text(&a.report);
    let round: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(to_json_text(&round), text);
}

#[test]
fn smallness_verdict_follows_epsilon() {
    let cfg = parse_config(r#"{"lattice": {"L": 4, "T": 2}}"#).unwrap();
    let loose = run(&cfg, Mode::Bounds, 1, 1e6).unwrap();
    let tight = run(&cfg, Mode::Bounds, 1, 1e-9).unwrap();
    assert_eq!(loose.report["smallness"]["part_i"], true);
    assert_eq!(tight.report["smallness"]["part_i"], false);
    let thr = |o: &fermion_rg::run::Outcome| parse_real(&o.report["smallness"]["threshold"]).unwrap();
    assert!((thr(&loose) / thr(&tight) - 1e15).abs() < 1e3);
}

#[test]
fn scaling_reports_three_channels() {
    let cfg = parse_config(r#"{"lattice": {"L": 2, "T": 2}}"#).unwrap();
    let out = run(&cfg, Mode::Scaling, 1, 0.1).unwrap();
    assert!(out.passed);
    let channels = out.report["channels"].as_array().unwrap();
    let names: Vec<&str> = channels.iter().map(|c| c["channel"].as_str().unwrap()).collect();
    assert_eq!(names, ["G2-K", "G4-V0", "G6"]);
    assert_eq!(out.tables[0].rows.len(), 3);
}

#[test]
fn greens_first_order_identities() {
    let cfg = parse_config(r#"{"lattice": {"L": 2, "T": 2}, "interaction": {"type": "onsite", "params": {"u": 1.0}}}"#)
        .unwrap();
    let out = run(&cfg, Mode::Greens, 1, 0.1).unwrap();
    assert!(out.passed);
    assert_eq!(out.tables.len(), 2);
    assert_eq!(out.tables[0].rows.len(), 9);
    assert!(parse_real(&out.report["first_order"]["g2_vs_k"]).unwrap() < 1e-8);
}
