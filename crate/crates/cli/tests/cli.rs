//! End-to-end runs of the `diracspec` binary.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn run_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_diracspec"));
    cmd.args(args).env_remove("DIRACSPEC_WORKERS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn run(args: &[&str]) -> Output {
    run_env(args, &[])
}

fn ok_json(args: &[&str]) -> Value {
    let out = run(args);
    assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn matrix(v: &Value) -> Vec<Vec<(f64, f64)>> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|row| row.as_array().unwrap().iter().map(|e| (e[0].as_f64().unwrap(), e[1].as_f64().unwrap())).collect())
        .collect()
}

fn write(dir: &Path, name: &str, v: &Value) -> String {
    let p = dir.join(name);
    fs::write(&p, v.to_string()).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn green_three_dimensional_closed_form() {
    let art = ok_json(&["green", "--n", "3", "--z", "0+1i", "--x", "1,0,0", "--y", "0,0,0"]);
    let alpha1 = matrix(&ok_json(&["clifford", "--n", "3"])["result"]["matrices"][0]);
    let g = matrix(&art["result"]["matrix"]);
    assert_eq!(art["result"]["N"], 4);
    let c = (-1.0f64).exp() / (4.0 * PI);
    for i in 0..4 {
        for j in 0..4 {
            let id = if i == j { 1.0 } else { 0.0 };
            let (re, im) = (-c * 2.0 * alpha1[i][j].1, c * (id + 2.0 * alpha1[i][j].0));
            assert!((g[i][j].0 - re).abs() < 1e-12 && (g[i][j].1 - im).abs() < 1e-12, "{i},{j}");
        }
    }
}

#[test]
fn green_zero_limit_in_two_dimensions() {
    let art = ok_json(&["green", "--n", "2", "--z", "0", "--x", "1,0", "--y", "0,0"]);
    assert_eq!(art["result"]["regime"], "zero_limit");
    let alpha1 = matrix(&ok_json(&["clifford", "--n", "2"])["result"]["matrices"][0]);
    let g = matrix(&art["result"]["matrix"]);
    let c = 1.0 / (2.0 * PI);
    for i in 0..2 {
        for j in 0..2 {
            let (re, im) = (-c * alpha1[i][j].1, c * alpha1[i][j].0);
            assert!((g[i][j].0 - re).abs() < 1e-14 && (g[i][j].1 - im).abs() < 1e-14);
        }
    }
}

#[test]
fn missing_parameter_is_a_usage_error() {
    let out = run(&["green", "--n", "3", "--z", "0+1i", "--x", "1,0,0"]);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_str(stderr(&out).trim()).unwrap();
    assert!(err["error"]["message"].as_str().unwrap().contains("missing required parameter"));
}

#[test]
fn malformed_values_are_usage_errors() {
    for args in [
        vec!["green", "--n", "2", "--z", "1+xi", "--x", "1,0", "--y", "0,0"],
        vec!["green", "--n", "2", "--z", "1", "--x", "1,0,0", "--y", "0,0"],
        vec!["witten", "--rows", "3", "--cols", "2", "--format", "csv"],
        vec!["clifford", "--n", "1"],
    ] {
        assert_eq!(run(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn det_audit_reports_and_gates() {
    let art = ok_json(&["det-audit", "--k", "2", "--dim", "6", "--trials", "100", "--seed", "7"]);
    let r = &art["result"];
    assert!(r["max_residual"].as_f64().unwrap() <= 1e-10);
    assert_eq!(r["trials"], 100);
    assert_eq!(r["seed"], 7);
    let art = ok_json(&["det-audit", "--k", "1", "--dim", "6", "--trials", "20", "--seed", "3"]);
    assert!(art["result"]["max_residual"].as_f64().unwrap() < 1e-13);
    assert_eq!(run(&["det-audit", "--k", "9", "--dim", "6", "--trials", "5"]).status.code(), Some(2));
}

#[test]
fn witten_index_of_eight_by_five() {
    let art = ok_json(&["witten", "--rows", "8", "--cols", "5", "--k", "2", "--seed", "1"]);
    assert!((art["result"]["extrapolated"].as_f64().unwrap() + 3.0).abs() < 1e-8);
}

#[test]
fn abel_of_step_is_one_half() {
    let art = ok_json(&["abel", "--xi", "step", "--lambda", "1e-6"]);
    assert!((art["result"]["values"][0]["value"].as_f64().unwrap() - 0.5).abs() < 1e-10);
    let art = ok_json(&["abel", "--xi", "indicator:-1:1", "--lambda", "4", "--limit"]);
    let expected = 2.0 * (0.5f64).asin() / PI;
    assert!((art["result"]["values"][0]["value"].as_f64().unwrap() - expected).abs() < 1e-10);
    assert!((art["result"]["limit"]["limit"].as_f64().unwrap() - 1.0).abs() < 1e-6);
}

fn diag_pair() -> Value {
    let z = json!([0.0, 0.0]);
    let s0: Vec<Value> = (0..4)
        .map(|i| json!((0..4).map(|j| if i == j { json!([i as f64 - 1.7, 0.0]) } else { z.clone() }).collect::<Vec<_>>()))
        .collect();
    let v = json!([
        [[0.5, 0.0], [0.2, 0.1], [0.0, 0.0], [0.0, 0.0]],
        [[0.2, -0.1], [-0.3, 0.0], [0.1, 0.0], [0.0, 0.0]],
        [[0.0, 0.0], [0.1, 0.0], [0.4, 0.0], [0.0, 0.2]],
        [[0.0, 0.0], [0.0, 0.0], [0.0, -0.2], [-0.6, 0.0]]
    ]);
    json!({ "s0": s0, "v": v })
}

#[test]
fn ssf_table_vanishes_outside_the_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let pair = write(dir.path(), "pair.json", &diag_pair());
    let out = dir.path().join("table.json");
    let out = out.to_str().unwrap();
    for method in ["krein", "eqmain", "counting"] {
        let status = run(&["ssf", "--pair", &pair, "--grid", "-5:5:200", "--method", method, "--m", "2", "--out", out]);
        assert_eq!(status.status.code(), Some(0), "{method}: {}", stderr(&status));
        let art: Value = serde_json::from_str(&fs::read_to_string(out).unwrap()).unwrap();
        let xi = art["result"]["xi"].as_array().unwrap();
        assert_eq!(xi.len(), 201);
        assert_eq!(xi[0].as_f64().unwrap().round(), 0.0);
        assert_eq!(xi[200].as_f64().unwrap().round(), 0.0);
        for key in ["lambda", "method", "eps", "flags"] {
            assert!(!art["result"][key].is_null(), "{key}");
        }
    }
    let art = ok_json(&["abel", "--xi", out, "--lambda", "0.25,1"]);
    assert_eq!(art["result"]["values"].as_array().unwrap().len(), 2);
}

#[test]
fn schema_violations_name_the_offending_field() {
    let dir = tempfile::tempdir().unwrap();
    let pot = write(dir.path(), "pot.json", &json!({ "family": "gaussian", "n": 2, "params": { "amplitude": "big" } }));
    let out = run(&["bs", "--n", "2", "--potential", &pot, "--z", "0+1i", "--m", "4", "--R", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("/params/amplitude"), "{}", stderr(&out));
    let pair = write(dir.path(), "pair.json", &json!({ "s0": [[[1.0, 0.0]]], "v": [[1.0]] }));
    let out = run(&["ssf", "--pair", &pair, "--grid", "-1:1:4"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("/v/0/0"), "{}", stderr(&out));
}

fn gaussian(dir: &Path, n: usize, amplitude: f64) -> String {
    let spec = json!({ "family": "gaussian", "n": n, "params": { "amplitude": amplitude, "matrix": "beta" } });
    write(dir, "pot.json", &spec)
}

#[test]
fn bs_and_threshold_reports() {
    let dir = tempfile::tempdir().unwrap();
    let pot = gaussian(dir.path(), 2, -1.0);
    let art = ok_json(&["bs", "--n", "2", "--potential", &pot, "--z", "0.5+1i", "--m", "6", "--R", "3", "--eig", "3", "--schatten", "3"]);
    let r = &art["result"];
    assert_eq!(r["dimension"], 72);
    assert_eq!(r["eigenvalues"].as_array().unwrap().len(), 3);
    assert!(r["schatten"]["value"].as_f64().unwrap() >= r["operator_norm"].as_f64().unwrap());
    let art = ok_json(&["threshold", "--n", "2", "--potential", &pot, "--m", "6", "--R", "3", "--sweep", "0.5:2:3"]);
    let r = &art["result"];
    assert!(r["report"]["hermiticity_residual"].as_f64().unwrap() <= 1e-10);
    assert!(["regular", "exceptional"].contains(&r["report"]["classification"].as_str().unwrap()));
    assert_eq!(r["sweep"].as_array().unwrap().len(), 4);
    let out = run(&["threshold", "--n", "3", "--potential", &pot, "--m", "4", "--R", "3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn scan_writes_csv_rows() {
    let out = run(&["scan", "--n", "2", "--z", "0+1i", "--x", "0,0", "--dir", "1,1", "--t", "0.5:2:3", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x1,x2,y1,y2,entry_row,entry_col,re,im");
    assert_eq!(lines.len(), 1 + 4 * 4);
    assert!(lines[1..].iter().all(|l| l.split(',').count() == 8));
}

#[test]
fn clifford_check_passes() {
    let art = ok_json(&["clifford", "--n", "5", "--check"]);
    assert_eq!(art["result"]["check"]["anticommute"], true);
    assert_eq!(art["result"]["matrices"].as_array().unwrap().len(), 6);
}

#[test]
fn artifacts_are_deterministic_and_replayable() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.json");
    let once = || {
        let out = run(&["witten", "--rows", "6", "--cols", "4", "--k", "1", "--seed", "42", "--out", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
        fs::read(&path).unwrap()
    };
    let (ta, tb) = (once(), once());
    assert_eq!(ta, tb);
    let art: Value = serde_json::from_slice(&ta).unwrap();
    assert_eq!(art["seed"], 42);
    assert!(art["version"].is_string());
    assert_eq!(art["config"]["command"], "witten");
    assert_eq!(art["config"]["params"]["rows"], 6);
    let leftovers = fs::read_dir(dir.path()).unwrap().count();
    assert_eq!(leftovers, 1);
}

#[test]
fn config_file_overrides_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cfg.json", &json!({ "k": 1, "seed": 5 }));
    let art = ok_json(&["witten", "--rows", "3", "--cols", "5", "--k", "2", "--config", &cfg]);
    assert_eq!(art["config"]["params"]["k"], 1);
    assert_eq!(art["seed"], 5);
    assert!((art["result"]["extrapolated"].as_f64().unwrap() - 2.0).abs() < 1e-8);
}

#[test]
fn worker_count_comes_from_the_environment() {
    let out = run_env(&["bench", "--reps", "1"], &[("DIRACSPEC_WORKERS", "1")]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let art: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(art["result"]["workers"], 1);
    let out = run_env(&["witten", "--rows", "2", "--cols", "2"], &[("DIRACSPEC_WORKERS", "zero")]);
    assert_eq!(out.status.code(), Some(2));
}
