use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qchull(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qchull")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_str(&stdout(out)).expect("valid json report")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const PRODUCT: &str = r#"{"m": 2, "n": 1, "gens": [
    {"word": "a", "trans": [0]}, {"word": "b", "trans": [0]}, {"word": "", "trans": [2]}]}"#;
const FREE: &str = r#"{"m": 2, "n": 1, "gens": [{"word": "a", "trans": [0]}, {"word": "b", "trans": [0]}]}"#;
const GRAPH: &str = "m = 2\nn = 1\n[[gens]]\nword = \"a\"\ntrans = [0]\n[[gens]]\nword = \"b\"\ntrans = [1]\n";

fn curve(csv: &str) -> Vec<(usize, usize, f64)> {
    let mut lines = csv.lines().filter(|l| !l.starts_with('#'));
    assert_eq!(lines.next(), Some("L,orbit_size,nu"));
    lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[1].parse().unwrap(), f[2].parse().unwrap())
        })
        .collect()
}

#[test]
fn qc_estimate_free_subgroup_is_flat() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "h.json", FREE);
    let c = curve(&stdout(&qchull(&["qc-estimate", "--input", &input, "--max-len", "4"])));
    assert_eq!(c.len(), 4);
    assert_eq!(c.iter().map(|r| r.1).collect::<Vec<_>>(), vec![5, 17, 53, 161]);
    assert!(c.iter().all(|r| (r.2 - 0.5).abs() < 1e-12), "{c:?}");
}

#[test]
fn qc_estimate_graph_subgroup_grows() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "k.toml", GRAPH);
    let c = curve(&stdout(&qchull(&["qc-estimate", "--input", &input, "--max-len", "4"])));
    assert!(c.windows(2).all(|w| w[1].2 > w[0].2), "{c:?}");
}

#[test]
fn qc_estimate_trivial_subgroup_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "t.json", r#"{"m": 2, "n": 1, "gens": [{"word": "", "trans": [0]}]}"#);
    let c = curve(&stdout(&qchull(&["qc-estimate", "--input", &input, "--max-len", "3"])));
    assert!(c.iter().all(|r| r.1 == 1 && r.2 == 0.0), "{c:?}");
}

#[test]
fn classify_reports_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let h = write(dir.path(), "h.json", PRODUCT);
    let r = json(&qchull(&["classify", "--input", &h, "--max-len", "4"]));
    assert_eq!(r["report"]["classification"]["verdict"], "virtually-product");
    assert_eq!(r["report"]["hull_check"]["violations"], 0);
    assert_eq!(r["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(r["config"]["max_len"], 4);

    let k = write(dir.path(), "k.toml", GRAPH);
    let r = json(&qchull(&["classify", "--input", &k, "--max-len", "8", "--hull-len", "0"]));
    assert_eq!(r["report"]["classification"]["verdict"], "graph-like-no-witness");
    assert_eq!(r["report"]["translations"], Value::Array(vec![]));

    let single = write(dir.path(), "s.json", r#"{"m": 2, "n": 1, "gens": [{"word": "ab", "trans": [0]}, {"word": "abab", "trans": [1]}]}"#);
    let r = json(&qchull(&["classify", "--input", &single, "--max-len", "4"]));
    assert_eq!(r["report"]["classification"]["verdict"], "single-axis");
    assert!(r["report"]["hull_check"]["skipped"].is_string());
}

#[test]
fn hull_check_on_product() {
    let dir = tempfile::tempdir().unwrap();
    let h = write(dir.path(), "h.json", PRODUCT);
    let r = json(&qchull(&["hull-check", "--input", &h, "--max-len", "3"]));
    assert_eq!(r["report"]["hull_check"]["violations"], 0);
    let radius = r["report"]["cocompactness"]["radius"].as_f64().unwrap();
    assert!((radius - 1.25f64.sqrt()).abs() < 1e-9, "{radius}");
}

#[test]
fn malformed_subgroup_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", r#"{"m": 2, "n": 1, "gens": [{"word": "a", "trans": [0, 1]}]}"#);
    let out = qchull(&["classify", "--input", &bad]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("gens[0].trans"));
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(qchull(&["brunn", "--space", "hyperbolic"]).status.code(), Some(2));
    assert_eq!(qchull(&["brunn", "--space", "rn", "--epsilon", "0"]).status.code(), Some(2));
    assert_eq!(qchull(&["brunn", "--space", "rn", "--dim", "5"]).status.code(), Some(2));
    assert_eq!(qchull(&["cone-broom", "--theta", "pi"]).status.code(), Some(2));
}

#[test]
fn brunn_triangle_is_strict() {
    let dir = tempfile::tempdir().unwrap();
    let tri = write(dir.path(), "tri.json", r#"[["0", "0"], ["1", "0"], ["0", "1"]]"#);
    let r = json(&qchull(&["brunn", "--space", "rn", "--input", &tri]));
    assert_eq!(r["report"]["passed"], true);
    assert!(r["report"]["witness"]["margin"].as_f64().unwrap() > 0.15);
}

#[test]
fn brunn_cone_and_tree_pass() {
    let r = json(&qchull(&["brunn", "--space", "cone", "--seed", "7", "--theta", "3pi"]));
    assert_eq!(r["report"]["passed"], true);
    assert_eq!(r["config"]["points"].as_array().unwrap().len(), 4);
    let r = json(&qchull(&["brunn", "--space", "tree", "--seed", "7", "--epsilon", "1/8"]));
    assert_eq!(r["report"]["passed"], true);
}

#[test]
fn identical_seeds_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let out = qchull(&["brunn", "--space", "cone", "--seed", "11", "--out", p.to_str().unwrap()]);
        assert!(out.status.success());
        assert!(out.stdout.is_empty());
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let other = stdout(&qchull(&["brunn", "--space", "cone", "--seed", "12"]));
    assert_ne!(fs::read_to_string(&a).unwrap(), other);
}

#[test]
fn cone_broom_hand_example_and_precondition() {
    let dir = tempfile::tempdir().unwrap();
    let pi = std::f64::consts::PI;
    let cfg = format!(
        r#"{{"a1": {{"r": 1.0, "phi": {}}}, "a2": {{"r": 1.0, "phi": {}}}, "b": {{"r": 1.0, "phi": 0.0}}}}"#,
        9.0 * pi / 8.0,
        11.0 * pi / 8.0
    );
    let input = write(dir.path(), "broom.json", &cfg);
    let r = json(&qchull(&["cone-broom", "--input", &input, "--theta", "5/2·π", "--samples", "9"]));
    assert_eq!(r["report"]["passed"], true);
    assert_eq!(r["report"]["samples"], 9);

    let near = write(
        dir.path(),
        "near.json",
        r#"{"a1": {"r": 1.0, "phi": 1.0}, "a2": {"r": 1.0, "phi": 4.0}, "b": {"r": 1.0, "phi": 0.0}}"#,
    );
    let out = qchull(&["cone-broom", "--input", &near]);
    assert_eq!(out.status.code(), Some(1));

    let r = json(&qchull(&["cone-broom", "--seed", "3", "--theta", "3pi"]));
    assert_eq!(r["report"]["passed"], true);
}
