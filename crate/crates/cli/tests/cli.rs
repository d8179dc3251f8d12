use std::path::PathBuf;
use std::process::{Command, Output};

use seclab::corpus;
use seclab::io::table_to_json_string;

fn seclab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_seclab")).args(args).output().unwrap()
}

fn write_table(dir: &tempfile::TempDir, name: &str, t: &seclab::JointTable) -> PathBuf {
    let p = dir.path().join(format!("{name}.json"));
    std::fs::write(&p, table_to_json_string(t)).unwrap();
    p
}

fn json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn emit_then_analyze() {
    let out = seclab(&["corpus", "emit", "ERASURE_HALF", "--json"]);
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("e.json");
    std::fs::write(&p, &out.stdout).unwrap();
    let p = p.to_str().unwrap();

    let v = json(&seclab(&["entropy", p, "I(X:Y|Z)", "--json"]));
    assert!((v["value"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    let v = json(&seclab(&["reversible", p, "--json"]));
    assert_eq!(v["status"], "reversible");
    let v = json(&seclab(&["classify", p, "--json"]));
    assert_eq!(v["verdicts"]["ubi"], "yes");
    let v = json(&seclab(&["partition", p, "--x", "X", "--y", "Y", "--json"]));
    assert_eq!(v["partition"]["blocks"].as_array().unwrap().len(), 2);
    let v = json(&seclab(&["embed", p, "--json"]));
    assert!((v["concurrence"].as_f64().unwrap() - 0.5).abs() < 1e-9);
}

#[test]
fn summary_output_is_line_per_field() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_table(&dir, "perfect", &corpus::named("PERFECT_BIT").unwrap());
    let out = seclab(&["entropy", p.to_str().unwrap(), "H(X)"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().collect::<Vec<_>>(), vec!["query: H(X)", "value: 1.0"]);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"variables":["X"],"alphabets":{"X":["0"]},"mass":[{"X":"0","p":0.5}]}"#).unwrap();
    assert_eq!(seclab(&["classify", bad.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(seclab(&["corpus", "emit", "NO_SUCH_TABLE"]).status.code(), Some(2));
    assert_eq!(seclab(&["classify", "/nonexistent/file.json"]).status.code(), Some(2));

    let wide = corpus::maxcorr(&[0.1; 10], &[0.5; 10]);
    let p = write_table(&dir, "wide", &wide);
    assert_eq!(seclab(&["intrinsic", p.to_str().unwrap()]).status.code(), Some(3));
    let ok = seclab(&["intrinsic", p.to_str().unwrap(), "--local-only", "--restarts", "2"]);
    assert!(ok.status.success());
}

#[test]
fn roles_can_be_regrouped() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_table(&dir, "xor", &corpus::named("XOR_TRIPLE").unwrap());
    // with Eve's symbol given to Bob the table is perfectly correlated
    let v = json(&seclab(&["intrinsic", p.to_str().unwrap(), "--y-role", "Y,Z", "--z-role", "", "--json"]));
    assert!((v["value"].as_f64().unwrap() - 1.0).abs() < 1e-9);
}
