use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn run(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_mdsp"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn json(args: &[&str], input: &str) -> Value {
    let mut a = args.to_vec();
    a.push("--json");
    let out = run(&a, input);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

const LINE: &str = "# v first\n2 2\n0 2\n1 1\n";

#[test]
fn exact_and_heuristic() {
    let v = json(&["mdsp-exact"], LINE);
    assert_eq!(v["x"], serde_json::json!(["-1"]));
    assert_eq!(v["dist_sq"], "2");
    let v = json(&["mdsp-heur", "--max-passes", "8"], LINE);
    assert_eq!(v["dist_sq"], "2");
    let v = json(&["mdsp-exact", "--fixed-index", "1"], "2 2\n1 1\n0 2\n");
    assert_eq!(v["dist_sq"], "2");
}

#[test]
fn cvp_round_trip() {
    let out = run(&["to-cvp"], LINE);
    assert!(out.status.success());
    let v = json(&["cvp-brute"], &String::from_utf8(out.stdout).unwrap());
    assert_eq!(v["j"], serde_json::json!(["-1"]));
    assert_eq!(v["objective"], "1/4");

    let lt = "2 2\n2 1\n1 1\n1 2\n1/3 1/3\n";
    let direct = json(&["cvp-brute"], lt);
    assert_eq!(direct["objective"], "2/9");
    let back = run(&["from-cvp"], lt);
    assert!(back.status.success());
    let ex = json(&["mdsp-exact"], &String::from_utf8(back.stdout).unwrap());
    assert_eq!(ex["dist_sq"], "9/11");
}

#[test]
fn lll_and_accel() {
    let v = json(&["lll"], "2 2\n1 1\n1 0\n");
    assert_eq!(v["shortest_norm_sq"], "1");
    let basis = run(&["gen", "--dims", "6", "--count", "1", "--seed", "4"], "");
    assert!(basis.status.success());
    let v = json(&["accel", "--delta", "1/4"], &String::from_utf8(basis.stdout).unwrap());
    assert_eq!(v["reached"], true);
}

#[test]
fn certificate_exit_codes() {
    let input = "2 2\n0 2\n1 1\n1 1\n-1\n";
    assert!(run(&["verify-cert", "--gamma", "1/2"], input).status.success());
    assert!(!run(&["verify-cert", "--gamma", "3/4"], input).status.success());
}

#[test]
fn bench_schema() {
    let v = json(&["bench", "--dims", "4,5", "--count", "2", "--seed", "9"], "");
    assert_eq!(v["seed"], 9);
    assert_eq!(v["count"], 2);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    for row in rows {
        for key in ["dim", "t_high_ms", "t_low_ms", "speedup", "target_norm_sq", "achieved_norm_sq"] {
            assert!(row.get(key).is_some(), "{key}");
        }
    }
}

#[test]
fn gen_is_deterministic() {
    let a = run(&["gen", "--dims", "6", "--count", "2", "--seed", "1"], "");
    assert_eq!(String::from_utf8(a.stdout).unwrap(), include_str!("fixtures/gen_d6_c2_s1.txt"));
}

#[test]
fn parse_errors_report_position() {
    let out = run(&["mdsp-exact"], "2 2\n0 2\n1 x\n");
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 3, column 3"), "{err}");
}
