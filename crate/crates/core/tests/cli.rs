use std::process::{Command, Output};

use serde_json::Value;

fn unruh(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_unruh"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_file(path: &std::path::Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn coinflip_writes_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cf.json");
    let o = unruh(&[
        "coinflip",
        "--mu-squared",
        "0.5",
        "--trials",
        "100000",
        "--seed",
        "42",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json_file(&out);
    let p1 = v["results"]["p_outcome1"].as_f64().unwrap();
    assert!((p1 - 0.5).abs() < 0.005);
    assert_eq!(v["manifest"]["subcommand"], "coinflip");
    assert_eq!(v["manifest"]["seed"], 42);
    assert_eq!(v["manifest"]["params"], v["params"]);
}

#[test]
fn teleport_near_ideal_limit() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("tp.json");
    let o = unruh(&[
        "teleport",
        "--mu",
        "0.999",
        "--alpha",
        "1,0",
        "--outcomes",
        "0.5,-0.2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json_file(&out);
    let b = &v["results"]["bob_conditional"];
    assert!(b["center"].is_array() && b["covariance"].is_array());
    assert_eq!(v["results"]["mu_limit"]["passed"], true);
}

#[test]
fn frames_prints_fair_coin() {
    let o = unruh(&["frames", "--accel", "9.06472", "--omega", "1", "--c", "1"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["results"]["mu_squared"].as_f64().unwrap() - 0.5).abs() < 1e-5);
}

#[test]
fn validation_errors_exit_with_two() {
    let o = unruh(&["coinflip", "--mu", "1.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("0 <= mu < 1"));

    let o = unruh(&["qkd", "--mu-squared", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("0 <= mu^2 < 1"));

    let o = unruh(&["teleport", "--mu", "0.5", "--frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));

    let o = unruh(&["coinflip", "--mu", "0.5", "--mu-squared", "0.25"]);
    assert_eq!(o.status.code(), Some(2));

    let o = unruh(&["--format", "csv", "qkd", "--mu", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn csv_report_has_header_and_rows() {
    let o = unruh(&[
        "--format",
        "csv",
        "report-eq5",
        "--mu-grid",
        "0.2,0.5,0.999",
    ]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# manifest: {"));
    assert!(lines[1].starts_with("mu,pipeline_center_x"));
    assert_eq!(lines.len(), 5);
    let last: Vec<f64> = lines[4].split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(last[0], 0.999);
}

#[test]
fn seedless_runs_are_repeatable() {
    let strip = |o: Output| {
        let mut v: Value = serde_json::from_slice(&o.stdout).unwrap();
        v["manifest"].as_object_mut().unwrap().remove("timestamp");
        v
    };
    let a = strip(unruh(&["qkd", "--mu", "0.6", "--bits", "500"]));
    let b = strip(unruh(&["qkd", "--mu", "0.6", "--bits", "500"]));
    assert_eq!(a, b);
    assert_eq!(a["manifest"]["seed"], 0);
    let c = strip(unruh(&[
        "qkd", "--mu", "0.6", "--bits", "500", "--seed", "1",
    ]));
    assert_ne!(a["results"]["alice_bits"], c["results"]["alice_bits"]);
}
