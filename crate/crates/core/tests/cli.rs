use std::path::Path;
use std::process::{Command, Output};

use blaschke::blaschke::io;
use blaschke::experiments::Report;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_blaschke")).args(args).output().expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = run(&["verify", "--scenario", "lemma3", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
    assert_eq!(run(&["verify", "--scenario", "nonsense"]).status.code(), Some(2));
    assert_eq!(run(&["verify"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "--scenario", "lemma3", "--p", "0.5"]).status.code(), Some(2));
}

#[test]
fn gen_writes_one_zero_per_annulus() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("zeros.json");
    let out = run(&["gen", "--kind", "exponential", "--m", "1", "--depth", "5", "--out", path_str(&file)]);
    assert_eq!(out.status.code(), Some(0));
    let seq = io::read_file::<f64>(&file).unwrap();
    assert_eq!(seq.len(), 5);

    let again = run(&["gen", "--kind", "exponential", "--m", "1", "--depth", "5"]);
    assert_eq!(again.stdout, std::fs::read(&file).unwrap());
}

#[test]
fn eval_and_classify_read_generated_zeros() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("zeros.json");
    assert!(run(&["gen", "--kind", "growing", "--depth", "6", "--out", path_str(&file)]).status.success());

    let csv = run(&["eval", "--zeros", path_str(&file), "--rings", "3", "--angles", "4"]);
    assert!(csv.status.success());
    let text = String::from_utf8(csv.stdout).unwrap();
    assert_eq!(text.lines().count(), 1 + 12);
    assert!(text.starts_with("re,im,b_re,b_im,db_re,db_im"));

    let class = run(&["classify", "--zeros", path_str(&file), "--depth", "6"]);
    assert!(class.status.success());
    let json: serde_json::Value = serde_json::from_slice(&class.stdout).unwrap();
    assert!(json.is_object());

    let missing = run(&["eval", "--zeros", path_str(&dir.path().join("absent.json"))]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn norm_of_constant_is_root_pi() {
    let out = run(&["norm", "--function", "constant", "--depth", "6", "--steps", "3"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let value = json["value"].as_f64().unwrap();
    assert!((value - std::f64::consts::PI.sqrt()).abs() < 1e-10);
    assert_eq!(json["verdict"], "finite");
}

#[test]
fn verify_is_deterministic_and_reevaluable() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for file in [&a, &b] {
        let out = run(&["verify", "--scenario", "lemma3", "--seed", "7", "--out", path_str(file)]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let (bytes_a, bytes_b) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(bytes_a, bytes_b);

    let report = Report::from_json(std::str::from_utf8(&bytes_a).unwrap()).unwrap();
    assert!(report.passed);
    assert!(report.is_consistent());
    assert_eq!(report.reevaluate(), report.passed);
}

#[test]
fn config_file_drives_verify_and_rejects_unknown_fields() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.json");
    std::fs::write(&good, r#"{"scenario": "lemma3", "seed": 3}"#).unwrap();
    let out = run(&["verify", "--config", path_str(&good)]);
    assert_eq!(out.status.code(), Some(0));
    let report = Report::from_json(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    assert_eq!(report.config.seed, 3);

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"scenario": "lemma3", "depth_limit": 3}"#).unwrap();
    assert_eq!(run(&["verify", "--config", path_str(&bad)]).status.code(), Some(2));
}
