use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const DIATOMIC: &str = "# X1 splits into two X2\nX1 -> 2 X2 @ 2\n2 X2 -> X1 @ 1\n";

fn crn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crn")).args(args).output().expect("binary runs")
}

fn write_net(dir: &TempDir, text: &str) -> PathBuf {
    let p = dir.path().join("net.crn");
    fs::write(&p, text).unwrap();
    p
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn analyze_reports_diatomic_structure() {
    let dir = TempDir::new().unwrap();
    let net = write_net(&dir, DIATOMIC);
    let out = crn(&["analyze", path(&net)]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["deficiency"], 0);
    assert_eq!(v["weakly_reversible"], true);
    assert_eq!(v["conserved_basis"], serde_json::json!([[2, 1]]));
}

#[test]
fn ack_certifies_balanced_state() {
    let dir = TempDir::new().unwrap();
    let net = write_net(&dir, DIATOMIC);
    let out = crn(&["ack", path(&net), "--c", "0.5,1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["complex_balanced"], true);
    assert!(v["interior_residual_l1"].as_f64().unwrap() <= 1e-8);
}

#[test]
fn ack_rejects_unbalanced_state() {
    let dir = TempDir::new().unwrap();
    let net = write_net(&dir, DIATOMIC);
    let out = crn(&["ack", path(&net), "--c", "1,1", "--caps", "25,25"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["complex_balanced"], false);
    assert!(v["interior_residual_l1"].as_f64().unwrap() > 0.1);
}

#[test]
fn parse_prints_canonical_form() {
    let dir = TempDir::new().unwrap();
    let net = write_net(&dir, "A <-> 0 @ 1, 3\n");
    let out = crn(&["parse", path(&net)]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "species: A\nA -> 0 @ 1\n0 -> A @ 3\n");
}

#[test]
fn parse_errors_exit_one_with_positions() {
    let dir = TempDir::new().unwrap();
    let net = write_net(&dir, "A -> B @ -2\n");
    let out = crn(&["parse", path(&net)]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains(":1:10:") && err.contains("E_RATE"), "{err}");
}

#[test]
fn usage_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let net = write_net(&dir, DIATOMIC);
    for args in [
        vec!["ack", path(&net), "--c", "x,1"],
        vec!["ack", path(&net), "--c", "-1,1"],
        vec!["ack", path(&net), "--c", "1,1", "--tol", "0"],
        vec!["rate", path(&net), "--x0", "1,0"],
        vec!["frobnicate"],
    ] {
        let out = crn(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
    let out = crn(&["ack", path(&net), "--c", "x,1"]);
    assert!(String::from_utf8(out.stderr).unwrap().contains("--c"));
}

#[test]
fn dimension_mismatch_is_a_domain_error() {
    let dir = TempDir::new().unwrap();
    let net = write_net(&dir, DIATOMIC);
    let out = crn(&["equilibrium", path(&net), "--x0", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains("E_DIM"));
}

#[test]
fn ssa_is_reproducible_and_writes_files() {
    let dir = TempDir::new().unwrap();
    let net = write_net(&dir, DIATOMIC);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let o = crn(&["ssa", path(&net), "--n0", "3,0", "--t-end", "20", "--seed", "7", "--out", path(out)]);
        assert_eq!(o.status.code(), Some(0));
        assert!(o.stdout.is_empty());
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    assert!(text.starts_with("t,X1,X2\n0,3,0\n"));
}

#[test]
fn ssa_histogram_csv() {
    let dir = TempDir::new().unwrap();
    let net = write_net(&dir, "0 -> A @ 3\nA -> 0 @ 1\n");
    let out = crn(&["ssa", path(&net), "--n0", "0", "--samples", "500", "--burn-in", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("A,count,frequency"));
    let total: u64 = lines.map(|l| l.split(',').nth(1).unwrap().parse::<u64>().unwrap()).sum();
    assert_eq!(total, 500);
}

#[test]
fn rate_and_master_emit_csv() {
    let dir = TempDir::new().unwrap();
    let net = write_net(&dir, "0 -> A @ 3\nA -> 0 @ 1\n");
    let out = crn(&["rate", path(&net), "--x0", "0", "--t-end", "1", "--dt", "0.5"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 4);
    let out = crn(&["master", path(&net), "--n0", "0", "--caps", "30", "--t-end", "20"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let p0: f64 = text.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!((p0 - (-3.0f64).exp()).abs() < 1e-6, "{p0}");
}

#[test]
fn noether_reports_zero_commutator() {
    let dir = TempDir::new().unwrap();
    let net = write_net(&dir, DIATOMIC);
    let out = crn(&["noether", path(&net), "--c", "0.5,1", "--caps", "20,20"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let law = &v["conserved"][0];
    assert_eq!(law["w"], serde_json::json!([2, 1]));
    assert_eq!(law["commutator_max_abs"], 0.0);
    for p in law["projections"].as_array().unwrap() {
        assert!(p["interior_residual_l1"].as_f64().unwrap() <= 1e-8);
    }
    for s in law["symmetry"].as_array().unwrap() {
        assert!(s["max_relative_error"].as_f64().unwrap() <= 1e-10);
    }
}

#[test]
fn json_output_is_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let net = write_net(&dir, DIATOMIC);
    let a = crn(&["equilibrium", path(&net), "--x0", "2,3"]);
    let b = crn(&["equilibrium", path(&net), "--x0", "2,3"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json(&a)["complex_balanced"], true);
}
