use std::path::Path;
use std::process::{Command, Output};

fn tool(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fermion-rg")).args(args).output().expect("binary runs")
}

fn config(dir: &Path, text: &str) -> String {
    let p = dir.join("config.json");
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const SMALL: &str = r#"{"lattice": {"L": 4, "T": 2}, "run": {"seed": 3}}"#;

#[test]
fn unknown_field_exits_2_with_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), r#"{"lattice": {"L": 4, "Lx": 3}}"#);
    let out = tool(&["bounds", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("lattice.Lx"));
}

#[test]
fn semantic_violation_exits_2_with_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), r#"{"dispersion": {"mu": 4.0}}"#);
    let out = tool(&["bounds", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("dispersion.mu"));
}

#[test]
fn missing_config_and_bad_flags_exit_2() {
    assert_eq!(tool(&["bounds", "--config", "/nonexistent/config.json"]).status.code(), Some(2));
    assert_eq!(tool(&["bounds"]).status.code(), Some(2));
    assert_eq!(tool(&["fly", "--config", "x.json"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "{}");
    assert_eq!(tool(&["--config", &cfg]).status.code(), Some(2));
    assert_eq!(tool(&["bounds", "--config", &cfg, "--epsilon", "-1"]).status.code(), Some(2));
}

#[test]
fn bounds_report_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), SMALL);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for d in [&a, &b] {
        let out = tool(&["bounds", "--config", &cfg, "--out", d.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let ra = std::fs::read(a.join("bounds.json")).unwrap();
    assert_eq!(ra, std::fs::read(b.join("bounds.json")).unwrap());
    let v: serde_json::Value = serde_json::from_slice(&ra).unwrap();
    assert_eq!(v["manifest"]["seed"], 3);
    assert_eq!(v["manifest"]["mode"], "bounds");
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), SMALL);
    let out_dir = dir.path().join("o");
    let out = tool(&["bounds", "--config", &cfg, "--out", out_dir.to_str().unwrap(), "--seed", "11"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(out_dir.join("bounds.json")).unwrap()).unwrap();
    assert_eq!(v["manifest"]["seed"], 11);
}

#[test]
fn csv_format_writes_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), r#"{"lattice": {"L": 2, "T": 2}}"#);
    let out_dir = dir.path().join("o");
    let out = tool(&["scaling", "--config", &cfg, "--out", out_dir.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(out_dir.join("scaling.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("channel,slope,within_tolerance"));
    assert_eq!(lines.count(), 3);
    assert!(out_dir.join("scaling.timing.json").exists());
}

#[test]
fn mode_from_config_when_not_given() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), r#"{"lattice": {"L": 2, "T": 2}, "run": {"mode": "scaling"}}"#);
    let out_dir = dir.path().join("o");
    let out = tool(&["--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out_dir.join("scaling.json").exists());
}
