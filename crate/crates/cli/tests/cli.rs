use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn mvlsw(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mvlsw"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = mvlsw(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn estimate_fixture(dir: &Path, length: &str) {
    ok(dir, &["fixture", "--eq3", "--length", length, "--out", "fx"]);
    ok(dir, &["simulate", "--spectrum", "fx", "--seed", "3", "--out", "x.csv"]);
    ok(dir, &["estimate", "--in", "x.csv", "--param", "4", "--bias-correct", "--out", "est"]);
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = mvlsw(dir.path(), &["estimate", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    assert_eq!(mvlsw(dir.path(), &["frobnicate"]).status.code(), Some(2));
}

#[test]
fn domain_errors_exit_one_with_a_single_line() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.csv"), "a,b\n1,2\n3,abc\n5,6\n7,8\n").unwrap();
    let out = mvlsw(dir.path(), &["estimate", "--in", "bad.csv", "--out", "est"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 1);
    assert!(err.starts_with("mvlsw: parse-error: "), "{err}");
    assert!(err.contains("row 3, column 2"), "{err}");

    let out = mvlsw(dir.path(), &["coherence", "--in", "missing", "--out", "c"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("mvlsw: invalid-bundle: "));
}

#[test]
fn bad_thread_count_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_mvlsw"))
        .current_dir(dir.path())
        .env("MVLSW_THREADS", "many")
        .args(["fixture", "--eq3", "--length", "16", "--out", "fx"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn fixture_plot_single_curve() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["fixture", "--eq3", "--length", "64", "--out", "fx"]);
    let printed = ok(dir.path(), &["plot", "--in", "fx", "--style", "1", "--info", "1,2,2", "--out", "one.svg"]);
    assert!(printed.contains("one.svg") && printed.contains("one.csv"));
    let csv = fs::read_to_string(dir.path().join("one.csv")).unwrap();
    let values: Vec<f64> = csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(values.len(), 64);
    assert_eq!(values[0], 2.0);
    assert!((values[63] - 10.0).abs() < 1e-12);
}

#[test]
fn estimate_reports_summary_and_auto_param() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["fixture", "--eq3", "--length", "256", "--out", "fx"]);
    ok(dir.path(), &["simulate", "--spectrum", "fx", "--seed", "9", "--dist", "t", "--df", "6", "--out", "x.csv"]);
    let summary = ok(dir.path(), &["estimate", "--in", "x.csv", "--bias-correct", "--out", "est"]);
    assert!(summary.contains("kernel: daniell(16)"), "{summary}");
    assert!(summary.contains("minimum eigenvalue"));
    let meta = fs::read_to_string(dir.path().join("est/meta.json")).unwrap();
    assert!(meta.contains("\"kind\": \"spectrum\""));
}

#[test]
fn coherence_panel_without_diagonal() {
    let dir = tempfile::tempdir().unwrap();
    estimate_fixture(dir.path(), "128");
    ok(dir.path(), &["coherence", "--in", "est", "--out", "rho"]);
    ok(dir.path(), &["coherence", "--in", "est", "--partial", "--out", "gamma"]);
    ok(
        dir.path(),
        &["plot", "--in", "rho", "--style", "2", "--info", "2", "--no-diag", "--ylim", "-1", "1", "--out", "rho2"],
    );
    let svg = fs::read_to_string(dir.path().join("rho2.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 3);
    let header = fs::read_to_string(dir.path().join("rho2.csv")).unwrap();
    assert_eq!(header.lines().next().unwrap(), "k,X1-X2 level 2,X1-X3 level 2,X2-X3 level 2");
    let meta = fs::read_to_string(dir.path().join("gamma/meta.json")).unwrap();
    assert!(meta.contains("partial-coherence"));
}

#[test]
fn intervals_and_overlay() {
    let dir = tempfile::tempdir().unwrap();
    estimate_fixture(dir.path(), "64");
    ok(
        dir.path(),
        &["ci", "--in", "est", "--alpha", "0.05", "--out-lower", "lo", "--out-upper", "hi", "--out-variance", "var"],
    );
    ok(
        dir.path(),
        &[
            "bootstrap", "--in", "est", "--reps", "3", "--seed", "4", "--out-lower", "blo", "--out-median", "bmed",
            "--out-upper", "bhi",
        ],
    );
    ok(
        dir.path(),
        &["plot", "--in", "est", "--style", "2", "--info", "2", "--interval", "lo", "hi", "--out", "ews"],
    );
    let svg = fs::read_to_string(dir.path().join("ews.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 6 * 3);
    ok(dir.path(), &["plot", "--in", "bmed", "--style", "4", "--info", "1,1", "--out", "heat"]);
    let grid = fs::read_to_string(dir.path().join("heat.csv")).unwrap();
    assert_eq!(grid.lines().count(), 6);
    assert!(grid.lines().all(|l| l.split(',').count() == 64));

    let out = mvlsw(dir.path(), &["plot", "--in", "est", "--style", "3", "--info", "2", "--out", "bad"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("mvlsw: info-mismatch: "));
}

#[test]
fn padding_and_column_selection() {
    let dir = tempfile::tempdir().unwrap();
    let rows: String = (0..100)
        .map(|t| format!("{},{},{}\n", t, 100.0 + (t as f64 * 0.3).sin(), 50.0 + (t as f64 * 0.7).cos()))
        .collect();
    fs::write(dir.path().join("prices.csv"), format!("day,A,B\n{rows}")).unwrap();
    ok(
        dir.path(),
        &[
            "estimate", "--in", "prices.csv", "--columns", "A,B", "--log-returns", "--pad", "reflect-pad", "--param",
            "3", "--out", "est",
        ],
    );
    let meta = fs::read_to_string(dir.path().join("est/meta.json")).unwrap();
    assert!(meta.contains("\"length\": 128"), "{meta}");
    assert!(meta.contains("\"A\""));
    let out = mvlsw(dir.path(), &["estimate", "--in", "prices.csv", "--pad", "error", "--out", "e2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("mvlsw: non-dyadic-length: "));
}
