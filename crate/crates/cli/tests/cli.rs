//! The `ptel` binary as a subprocess.

use std::path::Path;
use std::process::{Command, Output};

fn ptel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ptel")).args(args).output().expect("spawn ptel")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const CONFIG: &str = r#"{
    "params": {"alpha": 1, "beta": 0.5, "gamma": 0.5, "delta": -1},
    "coeffs": {"a": -1, "b": -1},
    "domain": {"q": 1, "p": 1},
    "phi": "1", "psi": "0", "M": "1",
    "grid": {"n_t": 9, "n_x": 9}
}"#;

fn config(dir: &Path, text: &str) -> String {
    let p = dir.join("run.json");
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn ml_prints_fifteen_digits() {
    let o = ptel(&["ml", "--alpha", "1", "--beta", "1", "--z", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "2.71828182845905");
}

#[test]
fn ml2_reports_discriminants() {
    let o = ptel(&["ml2", "--alpha", "1", "--beta", "0.5", "--gamma", "0.5", "--x", "-0.7071067811865476", "--y", "-0.5"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.lines().next().unwrap().starts_with("0.33882983045"), "{text}");
    assert!(text.contains("Δ₁"));
}

#[test]
fn help_and_usage_errors() {
    assert_eq!(ptel(&["--help"]).status.code(), Some(0));
    assert_eq!(ptel(&["--version"]).status.code(), Some(0));
    assert_eq!(ptel(&["ml", "--alpha", "1"]).status.code(), Some(2));
    assert_eq!(ptel(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn series_cap_is_nonconvergence() {
    let o = ptel(&["ml", "--alpha", "1", "--beta", "1", "--z", "30", "--max-terms", "3"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
}

#[test]
fn solve_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), CONFIG);
    let out = dir.path().to_string_lossy().into_owned();
    let s = ptel(&["solve", &cfg, "--out-dir", &out, "--plot"]);
    assert_eq!(s.status.code(), Some(0), "{}", String::from_utf8_lossy(&s.stderr));
    let u = std::fs::read_to_string(dir.path().join("u.csv")).unwrap();
    assert!(u.starts_with("t,x,u\n"));
    assert_eq!(u.lines().count(), 1 + 81);
    assert!(std::fs::read_to_string(dir.path().join("solution.svg")).unwrap().starts_with("<svg"));
    let v = ptel(&["verify", &cfg, "--out-dir", &out]);
    assert_eq!(v.status.code(), Some(0));
    assert!(stdout(&s).contains(&stdout(&v)));

    let headless: String = u.lines().skip(1).map(|l| format!("{l}\n")).collect();
    std::fs::write(dir.path().join("bad.csv"), headless).unwrap();
    let bad = dir.path().join("bad.csv").to_string_lossy().into_owned();
    assert_eq!(ptel(&["verify", &cfg, "--u", &bad]).status.code(), Some(2));
    assert_eq!(ptel(&["verify", &cfg, "--u", &bad, "--n-t", "3"]).status.code(), Some(2));
}

#[test]
fn regime_and_degenerate_configs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_string_lossy().into_owned();
    let cfg = config(dir.path(), &CONFIG.replace(r#""b": -1"#, r#""b": 2"#));
    assert_eq!(ptel(&["solve", &cfg, "--out-dir", &out]).status.code(), Some(4));
    let cfg = config(dir.path(), &CONFIG.replace(r#""a": -1"#, r#""a": 0"#));
    assert_eq!(ptel(&["solve", &cfg, "--out-dir", &out, "--mode", "relaxed"]).status.code(), Some(5));
    assert_eq!(ptel(&["solve", &dir.path().join("missing.json").to_string_lossy()]).status.code(), Some(2));
}
