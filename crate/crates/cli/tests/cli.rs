use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn models() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../models")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_biclosed")).args(args).output().expect("binary runs")
}

fn model(name: &str) -> String {
    models().join(name).display().to_string()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("report is JSON")
}

/// Delooped Z/2 over the Boolean quantale written as a table, optionally
/// without one multiplication entry.
fn z2_table(drop_entry: Option<&str>) -> String {
    let entries = [["0", "0", "0"], ["0", "1", "1"], ["1", "0", "1"], ["1", "1", "0"]];
    let p: Vec<String> = entries
        .iter()
        .filter(|e| drop_entry != Some(&e.join(",")))
        .map(|[a, b, c]| format!(r#"{{ "at": ["x","x","x"], "cell": ["{a}","{b}","{c}"], "value": "1" }}"#))
        .collect();
    format!(
        r#"{{
          "schema": 1,
          "quantales": {{ "b": {{ "kind": "boolean" }} }},
          "categories": {{ "d": {{ "kind": "discrete", "objects": ["0", "1"] }} }},
          "presheaves": {{ "const_y0": {{ "values": ["1", "0", "1", "0"] }} }},
          "probicategories": {{ "z2": {{ "kind": "table", "backend": "quantale:b", "ob": ["x"], "hom": [["d"]],
            "P": [{}], "J": [{{ "at": ["x"], "cell": ["0"], "value": "1" }}] }} }},
          "extensions": {{ "constant": {{ "probicategory": "z2", "n": ["const_y0"], "require_density": false }} }}
        }}"#,
        p.join(",")
    )
}

fn write_model(dir: &tempfile::TempDir, text: &str) -> String {
    let path = dir.path().join("model.json");
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn check_passes_and_is_reproducible() {
    let z2 = model("z2_boolean.json");
    let first = run(&["check", "--model", &z2]);
    assert_eq!(code(&first), 0, "{}", String::from_utf8_lossy(&first.stderr));
    let second = run(&["check", "--model", &z2]);
    assert_eq!(first.stdout, second.stdout);
    let r = report(&first);
    assert_eq!(r["status"], "pass");
    assert_eq!(r["schema"], 1);
    assert_eq!(r["command"]["name"], "check");
    assert!(r.get("timing").is_none());
    assert!(r["checks"].as_array().unwrap().iter().all(|c| c["status"] == "pass"));
}

#[test]
fn check_over_finite_sets() {
    let out = run(&["check", "--model", &model("z2_boolean.json"), "--backend", "finset", "--scope", "1"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn timing_is_opt_in() {
    let out = run(&["check", "--model", &model("z2_boolean.json"), "--timing"]);
    assert!(report(&out)["timing"]["elapsed_ms"].is_u64());
}

#[test]
fn report_file_and_summary_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let out = run(&["check", "--model", &model("z2_boolean.json"), "--report", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "check: pass");
    let written: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(written["status"], "pass");
}

#[test]
fn convolve_named_presheaves() {
    let out = run(&["convolve", "--model", &model("z2_boolean.json"), "--left", "y1", "--right", "y1"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    // y1 * y1 = y0 in Z/2
    assert_eq!(report(&out)["result"]["composite"]["quantale"], serde_json::json!([1, 0]));
}

#[test]
fn localise_walking_arrow() {
    let out = run(&["localise", "--model", &model("walking_arrow.json"), "--sigma", "s0"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    assert_eq!(r["result"]["local_objects"], 4);
    let held: Vec<&str> = r["result"]["held"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert!(held.contains(&"condition_1a"));
    assert_eq!(r["result"]["verified"], "1");
}

#[test]
fn reflect_from_model() {
    let out = run(&["reflect", "--model", &model("walking_arrow.json"), "--reflection", "local"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn extend_and_compare_along_yoneda() {
    let z2 = model("z2_boolean.json");
    let out = run(&["extend", "--model", &z2, "--n", "yoneda"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let out = run(&["extend", "--model", &z2, "--setup", "along_yoneda"]);
    assert_eq!(code(&out), 0);
    let out = run(&["compare", "--model", &z2, "--mode", "yoneda"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn extend_and_compare_along_localisation() {
    let arrow = model("walking_arrow.json");
    let out = run(&["extend", "--model", &arrow, "--setup", "along_localisation"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let out = run(&["compare", "--model", &arrow, "--mode", "localisation", "--sigma", "s0"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn intact_table_model_passes() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_model(&dir, &z2_table(None));
    let out = run(&["check", "--model", &path]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn broken_unit_law_fails_the_check() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_model(&dir, &z2_table(Some("0,1,1")));
    let out = run(&["check", "--model", &path]);
    assert_eq!(code(&out), 1);
    let r = report(&out);
    assert_eq!(r["status"], "fail");
    assert!(r["checks"].as_array().unwrap().iter().any(|c| c["status"] == "fail"));
}

#[test]
fn non_dense_family_fails() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_model(&dir, &z2_table(None));
    let out = run(&["extend", "--model", &path, "--setup", "constant"]);
    assert_eq!(code(&out), 1, "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    let density = r["checks"].as_array().unwrap().iter().find(|c| c["name"] == "density").unwrap();
    assert_eq!(density["status"], "fail");
}

#[test]
fn input_errors_exit_2() {
    let out = run(&["check", "--model", "/nonexistent/model.json"]);
    assert_eq!(code(&out), 2);
    assert!(out.stdout.is_empty());

    let dir = tempfile::tempdir().unwrap();
    let path = write_model(&dir, r#"{ "sigma_sets": { "s": { "probicategory": "ghost", "cells": [] } } }"#);
    let out = run(&["check", "--model", &path]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("ghost"));

    let path = write_model(&dir, "{ \"schema\": 1,\n  oops }");
    let out = run(&["check", "--model", &path]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    let out = run(&["check", "--model", &model("z2_boolean.json"), "--probicat", "absent"]);
    assert_eq!(code(&out), 2);
    let out = run(&["localise", "--model", &model("z2_boolean.json"), "--sigma", "absent"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn divergent_localisation_exits_2() {
    let out = run(&["localise", "--model", &model("parallel_pair.json"), "--sigma", "s", "--scope", "1"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("did not converge"));
}
