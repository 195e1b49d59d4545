use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cyclofav"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn cyclofav")
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).expect("stderr is JSON")
}

fn two_scale_input(tag: &str) -> PathBuf {
    let path = scratch(&format!("two_scale_{tag}.json"));
    let out = run(&[
        "construct", "--example", "two-scale", "--p", "2", "--q", "3", "--exp", "2",
        "--output", path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    path
}

#[test]
fn two_scale_pipeline() {
    let input = two_scale_input("t1");
    let input = input.to_str().unwrap();

    let out = run(&["--json", "profile", "--input", input, "--L", "169"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["profile"]["S_A"], serde_json::json!([6, 12, 18, 36]));

    let out = run(&["--json", "bound", "--two-prime", "--input", input, "--L", "169"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["satisfied"], true);
    assert_eq!(v["cardinality"], 13);

    let cert = scratch("two_scale_cert.json");
    let out = run(&[
        "--json", "slv", "--input", input, "--L", "169", "--lambda", "2/5",
        "--emit-cert", cert.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_eq!(v["prime"], 2);
    assert_eq!(v["exceeds_inverse_cardinality"], true);

    let out = run(&["verify", "--cert", cert.to_str().unwrap()]);
    assert!(out.status.success());
}

#[test]
fn verify_rejects_a_tampered_certificate() {
    let input = two_scale_input("t2");
    let cert = scratch("tampered_cert.json");
    let out = run(&[
        "slv", "--input", input.to_str().unwrap(), "--L", "169",
        "--emit-cert", cert.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(&cert).unwrap()).unwrap();
    v["separation"] = Value::String("1/7".into());
    std::fs::write(&cert, v.to_string()).unwrap();

    let out = run(&["verify", "--cert", cert.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_json(&out)["error"], "rejected");
}

#[test]
fn precondition_errors_exit_one_with_json() {
    let input = two_scale_input("t3");
    // |A| = 13 is outside the small-cardinality range.
    let out = run(&["bound", "--small-card", "--input", input.to_str().unwrap(), "--L", "169"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_json(&out)["error"], "invalid_argument");

    let out = run(&["verify", "--cert", "/nonexistent/cert.json"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn lam_leung_one_is_not_representable() {
    let out = run(&["--json", "bound", "--lam-leung", "--k", "1", "--primes", "2,3,5"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["representable"], false);

    let out = run(&["--json", "bound", "--lam-leung", "--k", "7", "--primes", "2,3,5"]);
    assert_eq!(stdout_json(&out)["representable"], true);
}

#[test]
fn census_table_and_jsonl() {
    let lines = scratch("census.jsonl");
    let out = run(&["--json", "census", "--N", "30", "--kmax", "7", "--jsonl", lines.to_str().unwrap()]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["table"]["7"]["(R_5:2R_3)"], 2);
    assert_eq!(v["table"]["2"]["R_2"], 1);
    let body = std::fs::read_to_string(&lines).unwrap();
    let total: u64 = v["table"]
        .as_object()
        .unwrap()
        .values()
        .flat_map(|m| m.as_object().unwrap().values())
        .map(|c| c.as_u64().unwrap())
        .sum();
    assert_eq!(body.lines().count() as u64, total);
    for line in body.lines() {
        let e: Value = serde_json::from_str(line).unwrap();
        assert_eq!(e["modulus"], 30);
    }
}

#[test]
fn census_state_guard() {
    let out = bin()
        .args(["census", "--N", "30", "--kmax", "7"])
        .env("CYCLOFAV_MAX_CENSUS_STATES", "10")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_json(&out)["error"], "guard");
}

#[test]
fn favard_csv_and_guard() {
    let out = run(&["favard", "--n-max", "2"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "n,fav,error_bound,loglog_slope");
    assert_eq!(rows.len(), 3);
    let fav1: f64 = rows[1].split(',').nth(1).unwrap().parse().unwrap();
    assert!((fav1 - 1.404178529).abs() < 1e-8);

    let out = bin()
        .args(["favard", "--n-max", "3"])
        .env("CYCLOFAV_MAX_POINTS", "16")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_json(&out)["error"], "guard");
}

#[test]
fn outputs_are_deterministic() {
    let input = two_scale_input("t4");
    let args = ["--json", "slv", "--input", input.to_str().unwrap(), "--L", "169"];
    let first = run(&args);
    let second = run(&args);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);

    let a = run(&["census", "--N", "12", "--kmax", "6"]);
    let b = run(&["census", "--N", "12", "--kmax", "6"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn construct_examples() {
    let out = run(&["--json", "construct", "--example", "xi"]);
    let v = stdout_json(&out);
    assert_eq!(v["modulus"], 30);
    let total: i64 = v["weights"].as_object().unwrap().values().map(|w| w.as_i64().unwrap()).sum();
    assert_eq!(total, 7);

    let out = run(&["--json", "construct", "--example", "long-fiber", "--p", "3", "--q", "2",
        "--alphas", "1,3,4", "--alpha", "4", "--beta", "2"]);
    let v = stdout_json(&out);
    let total: i64 = v["weights"].as_object().unwrap().values().map(|w| w.as_i64().unwrap()).sum();
    assert_eq!(total, 27);

    let out = run(&["construct", "--example", "rp"]);
    assert_eq!(out.status.code(), Some(1));
}
