use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_construct-audit"));
    cmd.env_remove("CONSTRUCT_AUDIT_MODE");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn write_construct(dir: &Path, name: &str, args: &[&str]) -> String {
    let path = dir.join(name);
    let mut full = vec!["construct"];
    full.extend_from_slice(args);
    let out = run(&full);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    std::fs::write(&path, &out.stdout).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn xor_audit_fails_on_misclassification() {
    let dir = tempfile::tempdir().unwrap();
    let xor = write_construct(dir.path(), "xor.json", &["xor"]);
    let out = run(&["audit", &xor, "--tests", "dp,misclass"]);
    assert_eq!(out.status.code(), Some(1));
    let r = json(&out);
    assert_eq!(r["schema"], "construct-audit/1");
    assert_eq!(r["mode"], "rational");
    assert_eq!(r["tests"][0]["pass"], true);
    assert_eq!(r["tests"][1]["statistic"], "1");
    assert_eq!(r["pass"], false);
}

#[test]
fn passing_audit_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let xor = write_construct(dir.path(), "xor.json", &["xor"]);
    let out = run(&["audit", &xor, "--tests", "dp"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn usage_and_input_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let xor = write_construct(dir.path(), "xor.json", &["xor"]);
    assert_eq!(run(&["audit", "/nonexistent/file.json"]).status.code(), Some(2));
    assert_eq!(run(&["audit", &xor, "--tests", "bogus"]).status.code(), Some(2));
    assert_eq!(run(&["audit", &xor, "--tau", "-1"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&[]).status.code(), Some(2));
    let out = run(&["construct", "alpha", "--alpha", "0.5", "--alpha-prime", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("construct-audit: "));
}

#[test]
fn environment_overrides_the_mode_flag() {
    let dir = tempfile::tempdir().unwrap();
    let xor = write_construct(dir.path(), "xor.json", &["xor"]);
    let out = bin().args(["audit", &xor, "--mode", "rational"]).env("CONSTRUCT_AUDIT_MODE", "float").output().unwrap();
    assert_eq!(json(&out)["mode"], "float");
    let out = bin().args(["audit", &xor]).env("CONSTRUCT_AUDIT_MODE", "sideways").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn reports_are_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let eo = write_construct(dir.path(), "eo.json", &["--seed", "3", "eqodds"]);
    let args = ["audit", &eo, "--worldview", "wae", "--criteria", "categorical,general", "--metric", "numeric"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout);
    assert!(a.stdout.ends_with(b"}\n"));
    let report = dir.path().join("report.json");
    let mut with_out = args.to_vec();
    with_out.extend_from_slice(&["--out", report.to_str().unwrap()]);
    run(&with_out);
    assert_eq!(std::fs::read(&report).unwrap(), a.stdout);
}

#[test]
fn alpha_audit_reports_a_negative_margin() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.json");
    // tv(Yo..) = 2/5, output disparity 1/4
    std::fs::write(
        &path,
        r#"{"supports": {"Yo": [0, 1], "Yp": [0, 1]}, "cells": [
            {"z": 0, "yo": 0, "yp": 0, "p": "1/5"}, {"z": 0, "yo": 0, "yp": 1, "p": "1/5"},
            {"z": 0, "yo": 1, "yp": 0, "p": "1/20"}, {"z": 0, "yo": 1, "yp": 1, "p": "1/20"},
            {"z": 1, "yo": 0, "yp": 0, "p": "3/20"}, {"z": 1, "yo": 0, "yp": 1, "p": "1/20"},
            {"z": 1, "yo": 1, "yp": 0, "p": "9/40"}, {"z": 1, "yo": 1, "yp": 1, "p": "3/40"}]}"#,
    )
    .unwrap();
    let out = run(&["audit", path.to_str().unwrap(), "--tests", "alpha", "--alpha", "0.5"]);
    assert_eq!(out.status.code(), Some(1));
    let r = json(&out);
    assert_eq!(r["tests"][0]["margin"], "-1/20");
    assert_eq!(r["quantities"]["observed_disparity"], "2/5");
    assert_eq!(r["quantities"]["output_disparity"], "1/4");
}

#[test]
fn distance_between_law_files() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    std::fs::write(&a, r#"{"0": "1/2", "2": "1/2"}"#).unwrap();
    std::fs::write(&b, r#"{"0": "1/4", "2": "3/4"}"#).unwrap();
    let (a, b) = (a.to_str().unwrap(), b.to_str().unwrap());
    let out = run(&["distance", a, b, "--metric", "numeric"]);
    assert_eq!(String::from_utf8_lossy(&out.stdout), "1/2\n");
    let out = run(&["distance", a, a]);
    assert_eq!(String::from_utf8_lossy(&out.stdout), "0\n");
}

#[test]
fn verify_and_replay() {
    let out = run(&["verify", "--theorem", "T9", "--trials", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r[0]["theorem"], "T9");
    assert_eq!(r[0]["failures"], 0);
    assert!(String::from_utf8_lossy(&out.stderr).contains("PASS"));
    let out = run(&["verify", "--theorem", "T9", "--replay", "17"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["pass"], true);
    assert_eq!(run(&["verify", "--replay", "17"]).status.code(), Some(2));
}
