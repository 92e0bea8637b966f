use std::path::Path;
use std::process::{Command, Output};

fn run_cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_frobcount"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn count_command_writes_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "count.json",
        r#"{
            "command": "count",
            "label": "conic_a5",
            "family": {"kind": "conic", "a": 5, "forms": [[1, 0]]},
            "grid": {"b_min": 10, "b_max": 40, "points": 3}
        }"#,
    );
    let out = run_cli(&["--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("conic_a5.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "b,count,undetermined,skipped_degenerate");
    assert_eq!(lines.count(), 3);
    let summary: serde_json::Value =
        serde_json::from_slice(&out.stdout).expect("stdout is machine-readable JSON");
    assert_eq!(summary["delta"]["total"], "1/1");
    let on_disk: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("conic_a5.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(summary, on_disk);
}

#[test]
fn reruns_and_thread_counts_are_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "count.json",
        r#"{
            "command": "count",
            "label": "rerun",
            "family": {"kind": "conic", "a": -1, "forms": [[1, 0]]},
            "b": 25
        }"#,
    );
    let out_dir = dir.path().to_str().unwrap();
    assert!(run_cli(&["--config", &cfg, "--out", out_dir]).status.success());
    let csv1 = std::fs::read(dir.path().join("rerun.csv")).unwrap();
    let json1 = std::fs::read(dir.path().join("rerun.json")).unwrap();
    assert!(run_cli(&["--config", &cfg, "--out", out_dir]).status.success());
    assert_eq!(csv1, std::fs::read(dir.path().join("rerun.csv")).unwrap());
    assert_eq!(json1, std::fs::read(dir.path().join("rerun.json")).unwrap());
    // integer outputs identical across thread counts
    assert!(run_cli(&["--config", &cfg, "--out", out_dir, "--threads", "4"]).status.success());
    assert_eq!(csv1, std::fs::read(dir.path().join("rerun.csv")).unwrap());
}

#[test]
fn densities_identity_grid_reports_all_passed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "densities.json",
        r#"{
            "command": "densities",
            "label": "identity",
            "identity_grid": {"primes": [2, 3, 5, 7], "max_r": 2, "max_c": 1, "max_a": 1}
        }"#,
    );
    let out = run_cli(&["--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["all_passed"], serde_json::json!(true));
    assert!(summary["checks"].as_u64().unwrap() > 0);
}

#[test]
fn search_command_reports_witnesses() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "search.json",
        r#"{"command": "search", "label": "pencil", "search": {"prime_bound": 100}}"#,
    );
    let out = run_cli(&["--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.path().join("pencil.csv")).unwrap();
    assert!(csv.starts_with("p,t0,t1,soluble_plus,soluble_minus\n"));
    assert!(csv.contains("7,3,1,false,true"));
}

#[test]
fn unknown_command_exits_2_with_error_json() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.json", r#"{"command": "frobnicate"}"#);
    let out = run_cli(&["--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["exit_code"], serde_json::json!(2));
    assert!(err["error"].as_str().unwrap().contains("frobnicate"));
}

#[test]
fn capacity_override_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "cap.json",
        r#"{
            "command": "count",
            "family": {"kind": "conic", "a": 5, "forms": [[1, 0]]},
            "b": 100,
            "point_budget": 10
        }"#,
    );
    let out = run_cli(&["--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    // the environment variable takes precedence over the config value
    let out = Command::new(env!("CARGO_BIN_EXE_frobcount"))
        .args(["--config", &cfg, "--out", dir.path().to_str().unwrap()])
        .env("FROBCOUNT_POINT_BUDGET", "100000000")
        .output()
        .unwrap();
    assert!(out.status.success());
}

#[test]
fn sum_command_matches_known_value() {
    let dir = tempfile::tempdir().unwrap();
    // Σ_{n ≤ 10} τ(n) = 27
    let cfg = write_config(
        dir.path(),
        "sum.json",
        r#"{
            "command": "sum",
            "label": "tau",
            "b": 10,
            "sum": {
                "forms": [{"coeffs": [1]}],
                "specs": [{"kind": "tau"}],
                "dimension": 1
            }
        }"#,
    );
    let out = run_cli(&["--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["rows"][0]["exact"], "27/1");
}
