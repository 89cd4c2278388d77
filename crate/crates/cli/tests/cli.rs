use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_octjordan"))
        .args(args)
        .env_remove("OCTJORDAN_SEED")
        .output()
        .expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn scratch(name: &str, body: &Value) -> PathBuf {
    let p = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    fs::write(&p, body.to_string()).unwrap();
    p
}

fn identity_point() -> Value {
    let zero = vec![json!("0"); 8];
    json!({"lambda": ["1", "1", "1"], "a": zero, "b": zero, "c": zero})
}

#[test]
fn verify_is_byte_identical_across_runs() {
    let args = ["verify", "--trials", "5", "--seed", "3", "--checks", "c1,c6,c10"];
    let (a, b) = (run(&args), run(&args));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v = report(&a);
    assert_eq!(v["checks"].as_array().unwrap().len(), 3);
    assert!(v.get("elapsed_ms").is_none());
}

#[test]
fn seed_falls_back_to_environment() {
    let with_env = Command::new(env!("CARGO_BIN_EXE_octjordan"))
        .args(["verify", "--trials", "2", "--checks", "c1"])
        .env("OCTJORDAN_SEED", "17")
        .output()
        .unwrap();
    assert_eq!(report(&with_env)["seed"], 17);
    let flag = run(&["verify", "--trials", "2", "--checks", "c1", "--seed", "17"]);
    assert_eq!(with_env.stdout, flag.stdout);
}

#[test]
fn keys_are_sorted() {
    let out = run(&["strata", "--surface", "sodm", "--samples", "5"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let v: Value = serde_json::from_str(&text).unwrap();
    let keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
}

#[test]
fn census_report_carries_tolerance_and_backend() {
    let out = run(&["strata", "--surface", "sextic", "--matrix", "N", "--samples", "20", "--tol", "1e-8"]);
    assert_eq!(out.status.code(), Some(0));
    let v = report(&out);
    assert_eq!(v["tol"], 1e-8);
    assert_eq!(v["backend"], "svd");
    assert_eq!(v["samples"], 20);
}

#[test]
fn census_csv() {
    let out = run(&["strata", "--surface", "cubic", "--samples", "10", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().count() >= 2);
    assert!(text.lines().next().unwrap().contains("corank"));
}

#[test]
fn eval_cartan_cubic_at_identity() {
    let p = scratch("identity.json", &identity_point());
    let out = run(&["eval", "--invariant", "det_cartan", "--input", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["value"], "1");
}

#[test]
fn eval_rank_on_complex_point() {
    let zero = vec![json!([0.0, 0.0]); 8];
    let point = json!({"lambda": [[0.0, 0.0], [1.0, 0.0], [1.0, 0.0]], "a": zero, "b": zero, "c": zero});
    let p = scratch("diag011.json", &point);
    let out = run(&["eval", "--invariant", "rank_m", "--input", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["value"], 16);
}

#[test]
fn reduce_single_point_with_transcript() {
    let lambda = [[2.0, 0.5], [1.0, -0.3], [0.7, 0.2]];
    let oct = |s: f64| (0..8).map(|i| json!([s * (i as f64 + 1.0).sin(), s * (i as f64).cos()])).collect::<Vec<_>>();
    let point = json!({"lambda": lambda, "a": oct(0.4), "b": oct(-0.3), "c": oct(0.25)});
    let input = scratch("reduce_in.json", &point);
    let transcript = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("transcript.json");
    let out = run(&["reduce", "--input", input.to_str().unwrap(), "--tol", "1e-6", "--transcript", transcript.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let v = report(&out);
    assert!(v["residual"].as_f64().unwrap() <= 1e-6);
    let t: Value = serde_json::from_str(&fs::read_to_string(transcript).unwrap()).unwrap();
    assert!(t.get("moves").is_some());
}

#[test]
fn usage_and_input_errors_exit_two() {
    assert_eq!(run(&["verify", "--prime", "15"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "--checks", "c99"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["strata", "--surface", "quartic"]).status.code(), Some(2));
    assert_eq!(run(&["eval", "--invariant", "det_cartan", "--input", "/nonexistent/point.json"]).status.code(), Some(2));
    let bad = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("bad.json");
    fs::write(&bad, "{not json").unwrap();
    assert_eq!(run(&["eval", "--invariant", "det_cartan", "--input", bad.to_str().unwrap()]).status.code(), Some(2));
    let out = run(&["verify", "--trials", "1", "--checks", "c1", "--out", "/nonexistent/dir/report.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn failing_gate_exits_one() {
    // A singular diagonal point is not generic for the reducer.
    let zero = vec![json!([0.0, 0.0]); 8];
    let point = json!({"lambda": [[0.0, 0.0], [1.0, 0.0], [1.0, 0.0]], "a": zero, "b": zero, "c": zero});
    let p = scratch("singular.json", &point);
    let out = run(&["reduce", "--input", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(report(&out)["passed"], false);
}

#[test]
fn out_flag_writes_file() {
    let dest = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("autdim.json");
    let out = run(&["autdim", "--prime", "313", "--seed", "1", "--retries", "1", "--out", dest.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&fs::read_to_string(dest).unwrap()).unwrap();
    assert_eq!(v["rank"], 133);
    assert_eq!(v["bound"], 29);
}
