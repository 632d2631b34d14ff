use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ordbreuil"))
}

fn write_input(name: &str, body: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("ordbreuil_cli_{}_{name}.json", std::process::id()));
    std::fs::write(&path, body).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

const EXAMPLE: &str = r#"{"prime": 13, "weights": [0, 4, 8], "coefficients": "Fp",
    "gauge": {"v10": 1, "v20": 0, "v20p": 1, "v21": 1, "alpha": [1, 1, 1]}, "rescale": [1, 2, 3]}"#;

#[test]
fn machine_reports_are_byte_identical() {
    let input = write_input("det", EXAMPLE);
    let path = input.to_str().unwrap();
    for cmd in ["monodromy", "fl", "etale", "dims"] {
        let a = run(&["--command", cmd, "--input", path, "--format", "machine", "--seed", "7"]);
        let b = run(&["--command", cmd, "--input", path, "--format", "machine", "--seed", "7"]);
        assert!(a.status.success(), "{cmd}: {}", String::from_utf8_lossy(&a.stdout));
        assert_eq!(a.stdout, b.stdout, "{cmd}");
        let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
        assert_eq!(v["status"], "ok");
    }
    let _ = std::fs::remove_file(input);
}

#[test]
fn monodromy_text_report() {
    let input = write_input("mono", EXAMPLE);
    let out = run(&["monodromy", "--input", input.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("exists: true"));
    assert!(text.contains("P10 = 5*u^96"));
    let _ = std::fs::remove_file(input);
}

#[test]
fn fl_rescaling_is_reported() {
    let input = write_input("fl", EXAMPLE);
    let out = run(&["--command", "fl", "--input", input.to_str().unwrap(), "--format", "machine"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["result"]["rescale"]["isomorphic_by_conjugation"], true);
    assert_eq!(v["result"]["pipeline_coherent"], true);
    let _ = std::fs::remove_file(input);
}

#[test]
fn gauge_with_transcript() {
    let input = write_input(
        "gauge",
        r#"{"prime": 13, "weights": [0, 4, 8], "precision": {"padic": 6, "fil": 9},
            "frobenius": [[[[0, 2]], [[0, 13]], []], [[[1, 26]], [[0, 3]], []], [[], [[0, 169]], [[0, 5], [2, 13]]]]}"#,
    );
    let out = run(&["--command", "gauge", "--input", input.to_str().unwrap(), "--format", "machine", "--transcript"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["result"]["verified"], true);
    assert!(!v["result"]["transcript"]["steps"].as_array().unwrap().is_empty());
    let _ = std::fs::remove_file(input);
}

#[test]
fn input_errors_exit_with_one() {
    let bad = write_input("bad", r#"{"prime": 13, "weights": [0, 3, 8]}"#);
    assert_eq!(run(&["validate", "--input", bad.to_str().unwrap()]).status.code(), Some(1));
    let schema = write_input("schema", r#"{"prime": "thirteen"}"#);
    assert_eq!(run(&["validate", "--input", schema.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(run(&["monodromy"]).status.code(), Some(1));
    assert_eq!(run(&["validate", "--input", "/nonexistent/input.json"]).status.code(), Some(1));
    let nonzero = write_input("nomono", &EXAMPLE.replace(r#""v20": 0"#, r#""v20": 4"#));
    let out = run(&["monodromy", "--input", nonzero.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().contains("exists: false"));
    for p in [bad, schema, nonzero] {
        let _ = std::fs::remove_file(p);
    }
}

#[test]
fn selftest_passes() {
    let out = run(&["selftest", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 6);
}
