use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn genhess(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_genhess")).args(args).output().expect("binary runs")
}

fn fixture(name: &str) -> String {
    format!("{}/fixtures/{name}.json", env!("CARGO_MANIFEST_DIR"))
}

fn scratch(name: &str, text: &str) -> PathBuf {
    let p = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

#[test]
fn verify_output_is_byte_identical() {
    let a = genhess(&["verify", "EX4.14"]);
    let b = genhess(&["verify", "EX4.14"]);
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["schema"], "genhess-report");
    assert_eq!(v["schema_version"], 1);
    assert!(v["results"][0].get("runtime_ms").is_none());
}

#[test]
fn probe_and_analyze_are_deterministic() {
    for args in [&["probe", "--seed", "3", "--count", "8"][..], &["analyze", &fixture("cross-axes")][..]] {
        let a = genhess(args);
        let b = genhess(args);
        assert_eq!(code(&a), 0, "{args:?}: {}", String::from_utf8_lossy(&a.stderr));
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn timings_are_opt_in() {
    let o = genhess(&["verify", "SMOOTH", "--timings"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["results"][0]["runtime_ms"].is_u64());
}

#[test]
fn markdown_shows_the_wedge_witness() {
    let o = genhess(&["verify", "EX4.14", "--format", "markdown"]);
    assert_eq!(code(&o), 0);
    let md = String::from_utf8(o.stdout).unwrap();
    assert!(md.contains("| wedge-saddle | witness pair |"), "{md}");
    assert!(md.contains(r#""ustar":["0","-2"]"#), "{md}");
    assert!(md.contains(r#""inner":"-2""#), "{md}");
}

#[test]
fn unknown_suite_is_a_usage_error() {
    let o = genhess(&["verify", "NOPE"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("NOPE"));
}

#[test]
fn unreadable_or_invalid_problems_are_usage_errors() {
    assert_eq!(code(&genhess(&["analyze", "/nonexistent/problem.json"])), 2);
    let bad = scratch("bad.json", r#"{"variant": "exact"}"#);
    assert_eq!(code(&genhess(&["analyze", bad.to_str().unwrap()])), 2);
    let off = scratch("off.json", r#"{"variant":"exact","smooth":{"Q":[[1]]},"xbar":[0],"xstar":[3]}"#);
    assert_eq!(code(&genhess(&["analyze", off.to_str().unwrap()])), 2);
    assert_eq!(code(&genhess(&["analyze", &fixture("quad-1d"), "--eta", "-1"])), 2);
}

#[test]
fn analysis_with_unsupported_operations_exits_one() {
    // Generalized Hessians need the exact class.
    let o = genhess(&["analyze", &fixture("sin-inv")]);
    assert_eq!(code(&o), 1);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["analysis"]["stationary_points"].as_array().is_some_and(|s| s.len() >= 3));
    assert!(v["summary"]["fail"].as_u64().unwrap() >= 1);
}

#[test]
fn overrides_reach_the_instance() {
    let o = genhess(&["analyze", &fixture("quad-diag12"), "--eta", "1/4", "--grid", "10", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["analysis"]["instance"]["params"]["eta"], 0.25);
    assert_eq!(v["analysis"]["instance"]["params"]["grid"], 10);
}

#[test]
fn fixtures_are_listed() {
    let o = genhess(&["fixtures", "list"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    for f in genhess_verifier::fixtures::corpus() {
        assert!(text.lines().any(|l| l.starts_with(f.name)), "{} missing", f.name);
    }
}
