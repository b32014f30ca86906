//! End-to-end tests of the `innerfn` binary: flag parsing, config handling,
//! file outputs, exit codes and report determinism.

use std::path::PathBuf;
use std::process::{Command, Output};
use std::sync::atomic::{AtomicU32, Ordering};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_innerfn"))
}

static DIR_COUNTER: AtomicU32 = AtomicU32::new(0);

fn scratch_dir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!(
        "innerfn-cli-test-{}-{}",
        std::process::id(),
        DIR_COUNTER.fetch_add(1, Ordering::SeqCst)
    ));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

#[test]
fn atomic_frostman_zero_export() {
    let dir = scratch_dir();
    let csv = dir.join("zeros.csv");
    let out = run(bin()
        .args(["zeros", "atomic-frostman", "--a", "0.367879441", "--n", "100", "--out"])
        .arg(&csv));
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "re,im");
    assert_eq!(rows.len(), 202, "header plus 201 zeros");
    // a is within 1e-9 of e^{-1}, so the first (smallest-modulus) zero is
    // numerically at the origin
    let first: Vec<f64> = rows[1].split(',').map(|t| t.parse().unwrap()).collect();
    assert!(first[0].abs() < 1e-8 && first[1].abs() < 1e-8, "row {}", rows[1]);
}

#[test]
fn missing_parameter_is_named_with_its_path() {
    let dir = scratch_dir();
    let cfg = dir.join("config.json");
    std::fs::write(
        &cfg,
        r#"{"schema_version": 1, "function": {"kind": "atomic_singular"},
            "weight": {"family": "power", "alpha": 0.0},
            "parameters": {"q": 1.0}}"#,
    )
    .unwrap();
    let out = run(bin().arg("--config").arg(&cfg).args(["verify", "theorem1"]));
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("parameters.p"), "stderr: {stderr}");
}

#[test]
fn usage_error_exits_one() {
    let out = run(bin().arg("no-such-command"));
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn verify_bergman_suite_on_atomic_function() {
    let out = run(bin().args([
        "verify",
        "theorem3",
        "--function",
        "atomic",
        "--p",
        "0.75",
        "--alpha",
        "0",
        "--m-norm",
        "10",
        "--max-n",
        "12",
    ]));
    assert_eq!(
        out.status.code(),
        Some(0),
        "stdout: {} stderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("convergent"), "stdout: {stdout}");
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let dir = scratch_dir();
    let first = dir.join("a.json");
    let second = dir.join("b.json");
    for path in [&first, &second] {
        let out = run(bin()
            .args([
                "verify",
                "theorem3",
                "--function",
                "blaschke:0.5",
                "--p",
                "0.75",
                "--alpha",
                "0",
                "--a",
                "0.1,0.2",
                "--m-norm",
                "8",
                "--max-n",
                "8",
                "--seed",
                "7",
                "--out-json",
            ])
            .arg(path));
        assert_eq!(out.status.code(), Some(0));
    }
    let a = std::fs::read(&first).unwrap();
    let b = std::fs::read(&second).unwrap();
    assert_eq!(a, b, "reports differ between identical runs");
}

#[test]
fn eval_atomic_at_origin() {
    let out = run(bin().args(["eval", "--function", "atomic", "--z", "0,0"]));
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("0.36787944117"), "stdout: {stdout}");
}

#[test]
fn weight_check_classifies_power_weight() {
    let dir = scratch_dir();
    let json = dir.join("weight.json");
    let out = run(bin()
        .args(["weight-check", "--weight", "power:1", "--p-list", "0.5,3", "--out-json"])
        .arg(&json));
    assert!(out.status.success());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(report["report"]["in_dhat"]["verdict"], "Member");
    assert_eq!(report["report"]["in_dcheck"]["verdict"], "Member");
    let alpha_hat = report["report"]["alpha_hat"].as_f64().unwrap();
    assert!((alpha_hat - 2.0).abs() < 0.05);
}

#[test]
fn threads_env_is_honored() {
    let out = run(bin()
        .env("INNERFN_THREADS", "1")
        .args(["eval", "--function", "atomic", "--z", "0.2,0.1"]));
    assert!(out.status.success());
}

#[test]
fn reproduce_example7_threshold_table() {
    let dir = scratch_dir();
    let json = dir.join("repro.json");
    let out = run(bin()
        .args(["reproduce", "example7", "--m", "12", "--out-json"])
        .arg(&json));
    assert_eq!(
        out.status.code(),
        Some(0),
        "stdout: {} stderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(report["failures"], 0);
    assert_eq!(report["bergman_grid"].as_array().unwrap().len(), 20);
}
