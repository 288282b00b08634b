//! CLI integration tests: exit codes, file round-trips, and byte-level
//! reproducibility (modulo the timestamp field).

use mmdhd::cli::{dispatch, load_samples, write_matrix_csv};
use ndarray::array;
use std::path::Path;
use std::process::Command;

fn write(path: &Path, content: &str) {
    std::fs::write(path, content).unwrap();
}

fn args(list: &[&str]) -> Vec<String> {
    std::iter::once("mmdhd".to_string())
        .chain(list.iter().map(|s| s.to_string()))
        .collect()
}

#[test]
fn test_command_happy_path() {
    let dir = tempfile::tempdir().unwrap();
    let x = dir.path().join("x.csv");
    let y = dir.path().join("y.csv");
    // shifted samples, enough rows for a variance estimate
    let xs: Vec<String> = (0..40).map(|i| format!("{},{}", i % 7, (i * 3) % 5)).collect();
    let ys: Vec<String> = (0..40)
        .map(|i| format!("{},{}", (i % 7) + 4, ((i * 3) % 5) + 4))
        .collect();
    write(&x, &(xs.join("\n") + "\n"));
    write(&y, &(ys.join("\n") + "\n"));
    let out = dir.path().join("out.json");
    let code = dispatch(args(&[
        "test",
        "--x",
        x.to_str().unwrap(),
        "--y",
        y.to_str().unwrap(),
        "--alpha",
        "0.05",
        "--bandwidth",
        "median",
        "--out",
        out.to_str().unwrap(),
    ]));
    assert_eq!(code, 0);
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["command"], "test");
    let outcome = &doc["outcome"];
    assert!(outcome["reject"].as_bool().unwrap());
    assert!(outcome["gamma_used"].as_f64().unwrap() > 0.0);
    assert!(outcome["p_value"].as_f64().unwrap() < 0.05);
}

#[test]
fn exit_codes_follow_error_class() {
    let dir = tempfile::tempdir().unwrap();
    let x = dir.path().join("x.csv");
    write(&x, "1,2\n3\n"); // ragged
    let y = dir.path().join("y.csv");
    write(&y, "1,2\n3,4\n");
    let code = dispatch(args(&[
        "test",
        "--x",
        x.to_str().unwrap(),
        "--y",
        y.to_str().unwrap(),
    ]));
    assert_eq!(code, 2, "ragged rows are a data error");

    let code = dispatch(args(&["test", "--no-such-flag"]));
    assert_eq!(code, 1, "unknown flags are a usage error");

    let code = dispatch(args(&["verify", "--suite", "no-such-suite"]));
    assert_eq!(code, 1);

    // missing file
    let code = dispatch(args(&["test", "--x", "/nonexistent.csv", "--y", "/nonexistent.csv"]));
    assert_eq!(code, 2);
}

#[test]
fn predict_reports_the_theorem_value() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p.json");
    let code = dispatch(args(&[
        "predict",
        "--n",
        "50",
        "--d",
        "100",
        "--sigma",
        "1",
        "--delta-norm",
        "2.5",
        "--alpha",
        "0.05",
        "--out",
        out.to_str().unwrap(),
    ]));
    assert_eq!(code, 0);
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let beta = doc["beta"].as_f64().unwrap();
    assert!((beta - 0.4486765).abs() < 1e-4, "beta = {beta}");
}

#[test]
fn verify_suite_runs_clean() {
    assert_eq!(dispatch(args(&["verify", "--suite", "cq-identity"])), 0);
    assert_eq!(dispatch(args(&["verify", "--suite", "rotation-invariance"])), 0);
}

#[test]
fn sweep_config_file_with_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    write(
        &cfg,
        r#"{
  "preset": null,
  "d_grid": [10, 20],
  "n_rule": {"fixed": 30},
  "psi_rule": {"fixed": 1.0},
  "bandwidth_rules": [{"power": {"c": 1.0, "alpha": 0.75}}],
  "law": {"family": "standard-normal", "scale": 1.0},
  "alpha": 0.05,
  "reps": 40,
  "master_seed": 3
}"#,
    );
    let out = dir.path().join("records.csv");
    let summary = dir.path().join("summary.json");
    let code = dispatch(args(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--reps",
        "20",
        "--out",
        out.to_str().unwrap(),
        "--summary-out",
        summary.to_str().unwrap(),
        "--seed",
        "9",
    ]));
    assert_eq!(code, 0);
    let csv = std::fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "d,n,gamma_rule,gamma_value,rejection_rate,stderr,predicted_beta,reps"
    );
    assert_eq!(lines.count(), 2);
    assert!(csv.contains(",20\n") || csv.ends_with(",20"), "reps flag override applies");
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&summary).unwrap()).unwrap();
    assert_eq!(doc["summary"]["config"]["reps"], 20);
    assert_eq!(doc["summary"]["config"]["master_seed"], 9);
}

#[test]
fn qq_and_beratio_write_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("qq.csv");
    let code = dispatch(args(&[
        "qq", "--n", "20", "--d-list", "5", "--reps", "100", "--out",
        out.to_str().unwrap(),
    ]));
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().next().unwrap(), "d,rank,statistic,normal_quantile");
    assert_eq!(text.lines().count(), 101);

    let out = dir.path().join("be.csv");
    let code = dispatch(args(&[
        "beratio",
        "--d-grid",
        "10,20",
        "--m-pairs",
        "200",
        "--out",
        out.to_str().unwrap(),
    ]));
    assert_eq!(code, 0);
    assert_eq!(
        std::fs::read_to_string(&out).unwrap().lines().count(),
        3
    );
}

#[test]
fn matrix_round_trip_via_cli_formats() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("m.csv");
    let m = array![[1.0e-17, 2.0], [std::f64::consts::E, -0.1]];
    write_matrix_csv(&m, &p).unwrap();
    assert_eq!(load_samples(&p).unwrap(), m);
}

#[test]
fn binary_honors_env_seed_and_is_reproducible() {
    let bin = env!("CARGO_BIN_EXE_mmdhd");
    let run = |seed_env: Option<&str>| -> serde_json::Value {
        let mut cmd = Command::new(bin);
        cmd.args(["predict", "--n", "10", "--d", "5", "--delta-norm", "1.0"]);
        cmd.env_remove("MMDHD_SEED");
        if let Some(s) = seed_env {
            cmd.env("MMDHD_SEED", s);
        }
        let out = cmd.output().unwrap();
        assert!(out.status.success());
        serde_json::from_slice(&out.stdout).unwrap()
    };
    assert_eq!(run(None)["seed"], 0);
    assert_eq!(run(Some("1234"))["seed"], 1234);

    // identical invocations agree byte-for-byte once the timestamp is removed
    let strip = |mut v: serde_json::Value| {
        v.as_object_mut().unwrap().remove("timestamp_unix");
        v
    };
    assert_eq!(strip(run(Some("7"))), strip(run(Some("7"))));
}

#[test]
fn binary_verify_failure_exit_code_path() {
    // the full appendix-integrals suite passes on a correct build; the
    // dedicated exit code is exercised through an unknown-suite usage error
    // plus the library-level contract that failing checks yield 3
    let bin = env!("CARGO_BIN_EXE_mmdhd");
    let out = Command::new(bin)
        .args(["verify", "--suite", "lemma1"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("PASS"));
    assert!(!text.contains("FAIL"));
}
