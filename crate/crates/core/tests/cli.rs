use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

use cofinitary::engine::RunTrace;

fn cofinitary(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cofinitary")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn run_to(path: &Path, args: &[&str]) -> Output {
    let mut full = vec!["run"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--out", path.to_str().unwrap()]);
    cofinitary(&full)
}

fn read_trace(path: &Path) -> RunTrace {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn coding_flagship_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.json");
    let out = run_to(&path, &["--flavor", "coding", "--bits", "1011", "--oracle", "trivial", "--schedule", "auto:4"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(read_trace(&path).decoded.to_string(), "1011");
    // One report line per step, then the decoded bits.
    assert_eq!(stdout(&out).lines().filter(|l| l.starts_with("step ")).count(), 12);
    assert!(stdout(&out).contains("decoded: 1011"));

    let verify = cofinitary(&["verify", path.to_str().unwrap()]);
    assert_eq!(verify.status.code(), Some(0));
    let decoded = cofinitary(&["decode", path.to_str().unwrap(), "--mode", "orbit-order", "--upto", "3"]);
    assert_eq!(stdout(&decoded).trim(), "1011");
}

#[test]
fn plain_flavor_with_bits_is_a_usage_error() {
    let out = cofinitary(&["run", "--flavor", "plain", "--bits", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_flags_are_usage_errors() {
    assert_eq!(cofinitary(&["run", "--flavor", "coding", "--bits", "1", "--frobnicate"]).status.code(), Some(2));
    assert_eq!(cofinitary(&["run", "--flavor", "coding", "--bits", "1", "--oracle", "lattice"]).status.code(), Some(2));
    assert_eq!(cofinitary(&["run", "--flavor", "dagger"]).status.code(), Some(2));
}

#[test]
fn dagger_words_run() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("dagger.json");
    let out = run_to(&path, &["--flavor", "dagger", "--bits", "11", "--words", "x,x^2,x^3"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let trace = read_trace(&path);
    assert_eq!(trace.decoded.to_string(), "11");
    let pp = cofinitary(&["decode", path.to_str().unwrap(), "--mode", "prime-parity", "--upto", "1"]);
    assert_eq!(stdout(&pp).trim(), "11");
    assert_eq!(cofinitary(&["verify", path.to_str().unwrap()]).status.code(), Some(0));
}

#[test]
fn verify_names_the_tampered_step() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.json");
    run_to(&path, &["--flavor", "coding", "--bits", "110", "--schedule", "auto:3"]);
    let mut doc: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let pair = &mut doc["steps"][2]["certificate"]["upper"]["injection"][0][1];
    *pair = Value::from(pair.as_u64().unwrap() + 1);
    std::fs::write(&path, doc.to_string()).unwrap();
    let out = cofinitary(&["verify", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("step 2"), "{}", stdout(&out));
}

#[test]
fn verify_missing_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = cofinitary(&["verify", dir.path().join("nope.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn decode_plain_injections() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.json");
    std::fs::write(&empty, "[]").unwrap();
    let out = cofinitary(&["decode", empty.to_str().unwrap(), "--mode", "prime-parity", "--upto", "3"]);
    assert_eq!(stdout(&out).trim(), "0000");

    // Closed orbits {0,1,2} and {3,4}: sizes 3 and 2.
    let two = dir.path().join("two.json");
    std::fs::write(&two, "[[0,1],[1,2],[2,0],[3,4],[4,3]]").unwrap();
    let out = cofinitary(&["decode", two.to_str().unwrap(), "--upto", "1"]);
    assert_eq!(stdout(&out).trim(), "10");

    // A closed orbit at 5 with 3 left uncovered is not nice.
    let gap = dir.path().join("gap.json");
    std::fs::write(&gap, "[[0,1],[1,2],[2,0],[5,6],[6,5]]").unwrap();
    let out = cofinitary(&["decode", gap.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn output_is_deterministic() {
    let args = ["run", "--flavor", "coding", "--bits", "0xa5", "--trees", "4", "--seed", "9"];
    let a = cofinitary(&args);
    let b = cofinitary(&args);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let trace: RunTrace = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(trace.steps.iter().filter(|s| s.tree_witness.is_some()).count(), 4);
}

#[test]
fn sealed_stage_feeds_the_next_run() {
    let dir = tempfile::tempdir().unwrap();
    let stages = dir.path().join("stages.json");
    let first = dir.path().join("first.json");
    let out = run_to(
        &first,
        &["--flavor", "dagger", "--bits", "10", "--schedule", "auto:3", "--seal", stages.to_str().unwrap()],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let sealed = cofinitary(&["decode", stages.to_str().unwrap(), "--mode", "prime-parity", "--upto", "1"]);
    assert_eq!(stdout(&sealed).trim(), "10");

    let second = dir.path().join("second.json");
    let oracle = format!("staged:{}", stages.display());
    let out = run_to(&second, &["--flavor", "dagger", "--bits", "01", "--oracle", &oracle, "--words", "x,x^2,x^3,g1.x"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(cofinitary(&["verify", second.to_str().unwrap()]).status.code(), Some(0));
}
