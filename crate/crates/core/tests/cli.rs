use std::process::{Command, Output};

use serde_json::Value;

fn umbral(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_umbral")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    let out = umbral(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_str(&stdout(&out)).unwrap()
}

#[test]
fn analyze_full_board() {
    let out = umbral(&["analyze", "--builtin", "full"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let line = text.lines().find(|l| l.starts_with("win probability")).unwrap();
    assert!(line.ends_with("0.6410373996231"), "{line}");
}

#[test]
fn bad_input_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{").unwrap();
    let out = umbral(&["analyze", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    std::fs::write(&path, r#"{"board": ["0", "X"], "animals": ["X"], "surprise": 1}"#).unwrap();
    assert_eq!(umbral(&["analyze", path.to_str().unwrap()]).status.code(), Some(2));

    assert_eq!(umbral(&["analyze", "/nonexistent/board.json"]).status.code(), Some(2));
    assert_eq!(umbral(&["analyze", "--builtin", "nope"]).status.code(), Some(2));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(umbral(&["simulate", "--builtin", "full", "--trials", "0"]).status.code(), Some(2));
    assert_eq!(umbral(&["analyze", "--builtin", "full", "-M", "0"]).status.code(), Some(2));
}

#[test]
fn simulate_is_reproducible() {
    let args = ["simulate", "--builtin", "simplified", "--trials", "20000", "--seed", "9", "--format", "json"];
    let a = json(&args);
    assert_eq!(a, json(&args));
    assert_eq!(a["trials"], 20000);
    let other = json(&["simulate", "--builtin", "simplified", "--trials", "20000", "--seed", "10", "--format", "json"]);
    assert_ne!(a["chick_histogram"], other["chick_histogram"]);
}

#[test]
fn dump_chain_shape() {
    let chain = json(&["dump-chain", "--builtin", "simplified"]);
    let transient = chain["transient"].as_array().unwrap().len();
    let absorbing = chain["absorbing"].as_array().unwrap().len();
    assert_eq!(transient + absorbing, 6);
    assert!(chain["edges"].as_array().unwrap().iter().any(|e| e["prob"] == "1/3"));
}

#[test]
fn dumped_chain_analyzes_like_the_board() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("chain.json");
    let out = umbral(&["dump-chain", "--builtin", "full", "--output", path.to_str().unwrap()]);
    assert!(out.status.success());
    let as_chain = json(&["analyze", path.to_str().unwrap(), "--format", "json"]);
    let as_board = json(&["analyze", "--builtin", "full", "--format", "json"]);
    for key in ["win_probability", "chicks", "rounds", "covariance", "correlation", "epsilon"] {
        assert_eq!(as_chain[key], as_board[key], "{key}");
    }
}

#[test]
fn json_report_fields() {
    let report = json(&["analyze", "--builtin", "simplified", "--format", "json", "--full-record", "-M", "4"]);
    assert_eq!(report["M"], 4);
    assert!(report["epsilon"]["fraction"].is_string());
    let record = report["record"].as_array().unwrap();
    assert!(!record.is_empty());
    assert!(record.iter().all(|r| r["state"] == "9"));
}

#[test]
fn nothing_absorbed_is_undefined() {
    let out = umbral(&["analyze", "--builtin", "simplified", "-M", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.lines().any(|l| l.starts_with("win probability") && l.ends_with("undefined")), "{text}");
}

#[test]
fn compare_against_another_board_fails() {
    let out = umbral(&["compare", "--builtin", "full", "--against", "simplified", "--trials", "20000"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("FAIL"));
}

#[test]
fn compare_simplified_passes() {
    let out = umbral(&["compare", "--builtin", "simplified", "--trials", "200000", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("PASS"));
}
