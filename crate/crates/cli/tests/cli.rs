use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_iqf-lab"));
    c.env_remove("IQF_LAB_BUDGET");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Writes Z2, P2 and their quantales into `dir`.
fn fixtures(dir: &TempDir) -> (PathBuf, PathBuf, PathBuf, PathBuf) {
    let z2s = write(dir, "z2s.json", r#"{"kind": "cyclic", "order": 2}"#);
    let p2s = write(dir, "p2s.json", r#"{"kind": "pair", "points": ["x", "y"]}"#);
    let z2 = dir.path().join("z2.json");
    let p2 = dir.path().join("p2.json");
    assert!(run(&["build", s(&z2s), "--out", s(&z2)]).status.success());
    assert!(run(&["build", s(&p2s), "--out", s(&p2)]).status.success());
    let qz2 = dir.path().join("qz2.json");
    let qp2 = dir.path().join("qp2.json");
    assert!(run(&["quantalize", s(&z2), "--out", s(&qz2)]).status.success());
    assert!(run(&["quantalize", s(&p2), "--out", s(&qp2)]).status.success());
    (z2, p2, qz2, qp2)
}

#[test]
fn build_quantalize_groupoidify() {
    let dir = TempDir::new().unwrap();
    let (_, p2, _, qp2) = fixtures(&dir);
    let o = run(&["validate", s(&qp2)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("inverse quantal frame"));
    let back = run(&["groupoidify", s(&qp2), "--format", "json"]);
    assert_eq!(back.status.code(), Some(0));
    let g: Value = serde_json::from_str(&stdout(&back)).unwrap();
    assert_eq!(g["arrows"].as_array().unwrap().len(), 4);
    let o = run(&["roundtrip", s(&p2)]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn emit_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let (z2, ..) = fixtures(&dir);
    let a = run(&["quantalize", s(&z2)]);
    let b = run(&["quantalize", s(&z2)]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn homs_counts() {
    let dir = TempDir::new().unwrap();
    let (_, _, qz2, qp2) = fixtures(&dir);
    let o = run(&["homs", s(&qz2), s(&qz2), "--unital", "--format", "json"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["count"], 2);
    let o = run(&["homs", s(&qz2), s(&qp2), "--unital", "--format", "json"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["count"], 2);
}

#[test]
fn algmorph_round_trip() {
    let dir = TempDir::new().unwrap();
    let (z2, p2, ..) = fixtures(&dir);
    let o = run(&["algmorph", "enumerate", s(&z2), s(&p2), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let ams = v["algmorphs"].as_array().unwrap();
    assert_eq!(v["count"].as_u64().unwrap() as usize, ams.len());
    assert!(!ams.is_empty());
    let a = write(&dir, "a.json", &serde_json::to_string(&ams[0]).unwrap());
    let h = dir.path().join("h.json");
    assert_eq!(run(&["algmorph", "tohom", s(&a), "--out", s(&h)]).status.code(), Some(0));
    // objects of the reconstructed groupoids are named by their unit arrows,
    // so compare through the hom again
    let back = dir.path().join("back.json");
    assert_eq!(run(&["algmorph", "fromhom", s(&h), "--out", s(&back)]).status.code(), Some(0));
    let again = run(&["algmorph", "tohom", s(&back)]);
    assert_eq!(again.status.code(), Some(0));
    assert_eq!(stdout(&again), std::fs::read_to_string(&h).unwrap());
}

#[test]
fn orbits_and_tensor() {
    let dir = TempDir::new().unwrap();
    let (z2, ..) = fixtures(&dir);
    let g: Value = serde_json::from_str(&std::fs::read_to_string(&z2).unwrap()).unwrap();
    // Z2 acting on {a, b} by swapping
    let left = serde_json::json!({
        "groupoid": g, "points": ["a", "b"], "anchor": {"a": "*", "b": "*"}, "side": "left",
        "act": [["0", "a", "a"], ["0", "b", "b"], ["1", "a", "b"], ["1", "b", "a"]],
    });
    let right = serde_json::json!({
        "groupoid": g, "points": ["a", "b"], "anchor": {"a": "*", "b": "*"}, "side": "right",
        "act": [["0", "a", "a"], ["0", "b", "b"], ["1", "a", "b"], ["1", "b", "a"]],
    });
    let l = write(&dir, "l.json", &left.to_string());
    let r = write(&dir, "r.json", &right.to_string());
    let o = run(&["orbits", s(&l), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["orbits"].as_array().unwrap().len(), 1);
    assert_eq!(v["invariant_elements"], 2);
    let o = run(&["tensor", s(&r), s(&l), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["fibered_product"].as_array().unwrap().len(), 4);
    assert_eq!(v["classes"].as_array().unwrap().len(), 2);
    // wrong order
    assert_eq!(run(&["tensor", s(&l), s(&r)]).status.code(), Some(2));
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let (z2, p2, qz2, _) = fixtures(&dir);
    let bad = write(&dir, "bad.json", "{");
    assert_eq!(run(&["validate", s(&bad)]).status.code(), Some(2));
    assert_eq!(run(&["validate", s(&dir.path().join("missing.json"))]).status.code(), Some(2));
    // carrier {u, a}, a·a = ⊥
    let q = write(
        &dir,
        "badq.json",
        r#"{"lattice": {"kind": "powerset", "carrier": ["u", "a"]},
            "mult_atoms": [[0, 0, 1], [0, 1, 2]],
            "invol": [1, 2], "unit": 1}"#,
    );
    let o = run(&["validate", s(&q)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("(a1∧e)a = a"), "{}", stdout(&o));
    assert_eq!(run(&["--budget", "2", "algmorph", "enumerate", s(&p2), s(&z2)]).status.code(), Some(3));
    let o = bin()
        .args(["homs", s(&qz2), s(&qz2), "--unital"])
        .env("IQF_LAB_BUDGET", "2")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
    let o = bin().args(["homs", s(&qz2), s(&qz2)]).env("IQF_LAB_BUDGET", "x").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_all_groups_only() {
    let o = run(&["verify-all", "--groups-only", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let suites = v["suites"].as_array().unwrap();
    let group = suites.iter().find(|s| s["suite"] == "group_case").unwrap();
    assert!(group["instances"].as_u64().unwrap() > 0);
    assert!(suites.iter().filter(|s| s["suite"] != "group_case").all(|s| s["skipped"].is_string()));
}

#[test]
fn verify_all_single_suite_text() {
    let o = run(&["verify-all", "--suite", "roundtrip"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("roundtrip"));
    assert!(text.contains("all passed"));
}
