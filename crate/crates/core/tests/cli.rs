//! The binary against direct library calls.

use std::path::Path;
use std::process::{Command, Output};

use fou_lab::cli::simulate_path;
use fou_lab::estimators::{moers_limit_quantile, moers_statistic, theta_hat_1, theta_hat_2, theta_hat_3, theta_hat_4};
use fou_lab::experiments::{preset, run_experiments, DEFAULT_SEED};
use fou_lab::{test_positive_drift, test_theta0_drift, HurstParam, Probability, SamplePath, Verdict};
use serde_json::Value;

fn fou_lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fou-lab"))
        .args(args)
        .env_remove("FOU_LAB_SEED")
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

fn h(v: f64) -> HurstParam {
    HurstParam::new(v).unwrap()
}

fn p(v: f64) -> Probability {
    Probability::new(v).unwrap()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-14 * a.abs().max(b.abs()).max(1.0)
}

fn write_binary(path: &SamplePath, file: &Path) {
    path.write_binary(std::fs::File::create(file).unwrap()).unwrap();
}

#[test]
fn simulate_binary_matches_library_path() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("b.bin");
    let f = file.to_str().unwrap();
    let out = fou_lab(&["simulate", "--hurst", "0.3", "--step", "0.01", "--points", "500", "--seed", "11", "--format", "binary", "-o", f]);
    assert!(out.status.success());
    let from_cli = SamplePath::read_binary(std::fs::File::open(&file).unwrap()).unwrap();
    let direct = simulate_path(h(0.3), 0.01, 500, None, 11).unwrap();
    assert_eq!(from_cli, direct);
}

#[test]
fn simulate_json_fou_path_matches_library() {
    let out = fou_lab(&[
        "simulate", "--hurst", "0.7", "--step", "0.05", "--points", "200", "--theta", "-0.5", "--x0", "2", "--seed", "3",
    ]);
    let v = json_of(&out);
    assert_eq!(v["schema"], "fou-lab/1");
    assert_eq!(v["process"], "fou");
    let direct = simulate_path(h(0.7), 0.05, 200, Some((-0.5, 2.0)), 3).unwrap();
    let values: Vec<f64> = v["values"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert_eq!(values.len(), direct.len());
    assert!(values.iter().zip(direct.values()).all(|(a, b)| close(*a, *b)));
}

#[test]
fn seed_defaults_and_env_override() {
    let default = json_of(&fou_lab(&["simulate", "--hurst", "0.5", "--step", "0.1", "--points", "4"]));
    assert_eq!(default["seed"], DEFAULT_SEED);
    let out = Command::new(env!("CARGO_BIN_EXE_fou-lab"))
        .args(["simulate", "--hurst", "0.5", "--step", "0.1", "--points", "4"])
        .env("FOU_LAB_SEED", "77")
        .output()
        .unwrap();
    assert_eq!(json_of(&out)["seed"], 77);
}

#[test]
fn test_sign_matches_library_decision() {
    for (xt, t) in [("40.5", "30"), ("-0.3", "30"), ("1e12", "2.5")] {
        let v = json_of(&fou_lab(&["test-sign", "--xt", xt, "--t", t, "--hurst", "0.4"]));
        let d = test_positive_drift(xt.parse().unwrap(), t.parse().unwrap(), 1.0, h(0.4), p(0.05)).unwrap();
        assert_eq!(v["schema"], "fou-lab/1");
        assert!(close(v["statistic_z"].as_f64().unwrap(), d.statistic_z));
        assert!(close(v["g_value"].as_f64().unwrap(), d.g_value.value()));
        assert!(close(v["guard_t0"].as_f64().unwrap(), d.guard_t0));
        assert_eq!(v["verdict"], serde_json::to_value(d.verdict).unwrap());
    }
}

#[test]
fn test_theta0_matches_library_decision() {
    let v = json_of(&fou_lab(&["test-theta0", "--xt", "2.5", "--t", "45", "--hurst", "0.7", "--theta0", "0.1"]));
    let d = test_theta0_drift(2.5, 45.0, 1.0, h(0.7), p(0.05), 0.1).unwrap();
    assert!(close(v["g_value"].as_f64().unwrap(), d.g_value.value()));
    assert_eq!(d.verdict, Verdict::RejectNull);
    assert_eq!(v["verdict"], "RejectNull");
}

#[test]
fn estimate_matches_library_for_every_estimator() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("x.bin");
    let f = file.to_str().unwrap();
    let hurst = h(0.6);
    // Step 1/20 with 20² + 1 points serves the discrete estimators at n = 20, m = 2.
    let path = simulate_path(hurst, 0.05, 400, Some((-1.0, 1.0)), 5).unwrap();
    write_binary(&path, &file);
    let cases = [
        ("erg1", theta_hat_1(&path, hurst).unwrap().value),
        ("non-erg2", theta_hat_2(&path, hurst).unwrap().value),
        ("disc-erg3", theta_hat_3(&path, hurst, 20, 2).unwrap().value),
        ("disc-non-erg4", theta_hat_4(&path, hurst, 20, 2).unwrap().value),
        ("moers", moers_statistic(&path, hurst).unwrap()),
    ];
    for (name, expected) in cases {
        let v = json_of(&fou_lab(&["estimate", "--input", f, "--hurst", "0.6", "--estimator", name, "--n", "20"]));
        assert!(close(v["value"].as_f64().unwrap(), expected), "{name}");
        assert!(close(v["horizon_T"].as_f64().unwrap(), 20.0), "{name}");
    }
}

#[test]
fn estimate_reads_json_path_documents() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("x.json");
    let f = file.to_str().unwrap();
    let sim = fou_lab(&["simulate", "--hurst", "0.5", "--step", "0.01", "--points", "1000", "--theta", "1", "-o", f]);
    assert!(sim.status.success());
    let v = json_of(&fou_lab(&["estimate", "--input", f, "--hurst", "0.5", "--estimator", "non-erg2"]));
    let path = simulate_path(h(0.5), 0.01, 1000, Some((1.0, 1.0)), DEFAULT_SEED).unwrap();
    let expected = theta_hat_2(&path, h(0.5)).unwrap().value;
    assert!((v["value"].as_f64().unwrap() - expected).abs() < 1e-12);
}

#[test]
fn tables_json_matches_library_run() {
    let v = json_of(&fou_lab(&["tables", "--name", "table1", "--format", "json", "--workers", "1"]));
    let report = run_experiments(&preset("table1").unwrap(), 1).unwrap();
    assert_eq!(v["spec_digest"], report.spec_digest);
    for (r, row) in report.cells.iter().enumerate() {
        for (c, cell) in row.iter().enumerate() {
            assert!(close(v["cells"][r][c].as_f64().unwrap(), cell.unwrap()));
        }
    }
}

#[test]
fn tables_csv_from_spec_file() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("spec.json");
    let mut spec = preset("table3").unwrap().remove(0);
    spec.replications = 50;
    spec.time_grid = vec![40.0];
    spec.marginal_mode = fou_lab::experiments::MarginalMode::ExactGaussian;
    std::fs::write(&file, serde_json::to_string(&spec).unwrap()).unwrap();
    let out = fou_lab(&["tables", "--spec", file.to_str().unwrap(), "--workers", "2"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with(",theta=-0.1,"));
    assert!(lines.next().unwrap().starts_with("\"H=0.3,t=40\","));
    assert!(text.trim_end().ends_with(&format!("seed={}", spec.seed)));
    assert!(text.contains(&format!("spec_digest={}", spec.digest())));
}

#[test]
fn moers_quantile_matches_library() {
    let v = json_of(&fou_lab(&[
        "moers-quantile", "--hurst", "0.7", "--replications", "1000", "--grid-points", "200", "--seed", "9", "--workers", "2",
    ]));
    let q = moers_limit_quantile(h(0.7), p(0.95), 1000, 200, 9).unwrap();
    assert!(close(v["quantile"].as_f64().unwrap(), q));
}

#[test]
fn exit_codes() {
    // Guard violation and invalid parameters are validation failures.
    let guard = fou_lab(&["test-sign", "--xt", "3", "--t", "1.05", "--hurst", "0.5"]);
    assert_eq!(guard.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&guard.stderr).contains("t0"));
    assert_eq!(fou_lab(&["test-sign", "--xt", "3", "--t", "10", "--hurst", "1.5"]).status.code(), Some(2));
    assert_eq!(fou_lab(&["tables", "--name", "table9"]).status.code(), Some(2));
    assert_eq!(fou_lab(&["moers-quantile", "--hurst", "0.7", "--replications", "999"]).status.code(), Some(2));
    assert_eq!(fou_lab(&["frobnicate"]).status.code(), Some(2));
    // Missing input is a runtime failure.
    let missing = fou_lab(&["estimate", "--input", "/nonexistent/path", "--hurst", "0.5", "--estimator", "erg1"]);
    assert_eq!(missing.status.code(), Some(1));
    let help = fou_lab(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
    assert!(!help.stdout.is_empty());
}
