use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bsarr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bsarr"))
        .args(args)
        .env("SOURCE_DATE_EPOCH", "1700000000")
        .output()
        .expect("run bsarr")
}

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const TRIANGLE: &str = r#"{"n": 2, "forms": [["1","0"],["0","1"],["1","1"]]}"#;
const FOUR_LINES: &str = r#"{"n": 2, "forms": [["1","0"],["0","1"],["1","1"],["1","-1"]]}"#;

#[test]
fn witness_then_verify() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "a.json", TRIANGLE);
    let cert = dir.path().join("c.json");
    let out = bsarr(&["witness", "--input", s(&input), "--output", s(&cert)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let c: Value = serde_json::from_str(&std::fs::read_to_string(&cert).unwrap()).unwrap();
    assert_eq!(c["status"], "verified");
    assert_eq!(c["provenance"], "exchange");
    assert_eq!(c["b"]["role"], "generator");

    let out = bsarr(&["verify", "--input", s(&cert)]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["verified"], true);
}

#[test]
fn tampered_certificate_fails_verification() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "a.json", TRIANGLE);
    let cert = dir.path().join("c.json");
    assert_eq!(bsarr(&["witness", "--input", s(&input), "--output", s(&cert)]).status.code(), Some(0));
    let mut c: Value = serde_json::from_str(&std::fs::read_to_string(&cert).unwrap()).unwrap();
    let w = c["witness"].as_str().unwrap().to_string();
    c["witness"] = Value::String(format!("{w} + d1"));
    std::fs::write(&cert, serde_json::to_string(&c).unwrap()).unwrap();
    let out = bsarr(&["verify", "--input", s(&cert)]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn non_generic_reports_dependent_subset() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "a.json", r#"{"n": 2, "forms": [["1","0"],["0","1"],["2","0"]]}"#);
    let out = bsarr(&["check-generic", "--input", s(&input)]);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["generic"], false);
    assert_eq!(v["witness"], serde_json::json!([1, 3]));
    assert_eq!(bsarr(&["witness", "--input", s(&input)]).status.code(), Some(1));
}

#[test]
fn slopes_of_triangle() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "a.json", TRIANGLE);
    let out = bsarr(&["slopes", "--input", s(&input)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["passed"], true);
    let slopes: Vec<Vec<i64>> = serde_json::from_value(v["slopes"].clone()).unwrap();
    assert_eq!(slopes, vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1], vec![1, 1, 1]]);
}

#[test]
fn malformed_json_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "a.json", "{\"n\": 2,\n  \"forms\": [[\"1\" \"0\"]]}");
    let out = bsarr(&["candidate", "--input", s(&input)]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn unknown_fields_and_bad_forms_are_input_errors() {
    let dir = TempDir::new().unwrap();
    let extra = write(&dir, "x.json", r#"{"n": 2, "forms": [["1","0"]], "extra": 1}"#);
    assert_eq!(bsarr(&["candidate", "--input", s(&extra)]).status.code(), Some(2));
    let short = write(&dir, "y.json", r#"{"n": 2, "forms": [["1"],["0","1"],["1","1"]]}"#);
    assert_eq!(bsarr(&["candidate", "--input", s(&short)]).status.code(), Some(2));
    let input = write(&dir, "z.json", FOUR_LINES);
    // the symbol ideal needs p = n + 1
    assert_eq!(bsarr(&["groebner-check", "--input", s(&input)]).status.code(), Some(2));
}

#[test]
fn output_is_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "a.json", TRIANGLE);
    let first = bsarr(&["witness", "--input", s(&input)]);
    let second = bsarr(&["witness", "--input", s(&input)]);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);
    let v: Value = serde_json::from_slice(&first.stdout).unwrap();
    assert_eq!(v["timestamp"], "2023-11-14T22:13:20Z");
}

#[test]
fn annihilator_reports_membership() {
    let dir = TempDir::new().unwrap();
    let body = format!(r#"{{"arrangement": {TRIANGLE}, "operator": "x1*d1 + x2*d2 - s1 - s2 - s3"}}"#);
    let input = write(&dir, "a.json", &body);
    let out = bsarr(&["annihilator", "--input", s(&input)]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["annihilates"], true);
    assert_eq!(v["member"], true);

    let body = format!(r#"{{"arrangement": {TRIANGLE}, "operator": "d1"}}"#);
    let input = write(&dir, "b.json", &body);
    let out = bsarr(&["annihilator", "--input", s(&input)]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["annihilates"], false);
    assert_eq!(v["member"], false);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn symbol_checks_pass_on_triangle() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "a.json", TRIANGLE);
    for cmd in ["groebner-check", "conormal-check"] {
        let out = bsarr(&[cmd, "--input", s(&input)]);
        assert_eq!(out.status.code(), Some(0), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn tables_and_euler_identities() {
    let out = bsarr(&["ck-table", "--n", "2", "--k", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let values: Vec<u64> = v["entries"].as_array().unwrap().iter().map(|e| e["value"].as_u64().unwrap()).collect();
    assert_eq!(values, vec![1, 2, 1]);
    assert_eq!(bsarr(&["euler-check", "--n", "3", "--k", "3"]).status.code(), Some(0));
    assert_eq!(bsarr(&["euler-check", "--n", "0", "--k", "3"]).status.code(), Some(2));
}
