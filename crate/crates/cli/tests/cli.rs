use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fkest(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fkest")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn dist_oracle_fixtures() {
    let dir = tempfile::tempdir().unwrap();
    let k3 = write(dir.path(), "k3", "3 3\n0 1\n0 2\n1 2\n");
    let c5 = write(dir.path(), "c5", "5 5\n0 1\n1 2\n2 3\n3 4\n0 4\n");
    let v = json(&fkest(&["dist-oracle", "--input", k3.to_str().unwrap(), "--property", "triangle-free"]));
    assert_eq!(v["dist"].as_f64().unwrap(), 1.0 / 9.0);
    let v = json(&fkest(&["dist-oracle", "--input", c5.to_str().unwrap(), "--property", "bipartite"]));
    assert_eq!(v["dist"].as_f64().unwrap(), 1.0 / 25.0);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let k3 = write(dir.path(), "k3", "3 3\n0 1\n0 2\n1 2\n");
    let bad = write(dir.path(), "bad", "3 2\n0 1\n");
    let big = write(dir.path(), "c8", "8 1\n0 1\n");
    let k3 = k3.to_str().unwrap();
    assert_eq!(fkest(&["dist-oracle", "--input", k3, "--property", "planar"]).status.code(), Some(2));
    assert_eq!(fkest(&["dist-oracle", "--input", bad.to_str().unwrap(), "--property", "edgeless"]).status.code(), Some(2));
    assert_eq!(fkest(&["dist-oracle", "--input", big.to_str().unwrap(), "--property", "edgeless"]).status.code(), Some(3));
    assert_eq!(fkest(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(fkest(&["dist-oracle", "--input", k3]).status.code(), Some(2));
    assert_eq!(fkest(&["suite", "--scenario", "nope", "--seed", "1", "--out", "/dev/null"]).status.code(), Some(2));
}

#[test]
fn estimate_reports_a_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "g", "6 2\n0 1\n2 3\n");
    let args = [
        "estimate", "--input", g.to_str().unwrap(), "--property", "edgeless", "--alpha", "0.3", "--eps", "0.1", "--delta",
        "0.1", "--beta", "0.25", "--cap", "3", "--gamma", "0.25", "--seed", "4",
    ];
    let v = json(&fkest(&args));
    assert_eq!(v["report"]["verdict"]["case"], "close");
    let w = &v["report"]["verdict"]["witness"];
    assert!(w["d1"].as_f64().unwrap() <= 0.25 + 1e-12);
}

#[test]
fn regularity_and_rounding() {
    let dir = tempfile::tempdir().unwrap();
    let c4 = write(dir.path(), "c4", "4 4\n0 1\n1 2\n2 3\n0 3\n");
    let parts = write(dir.path(), "p", "4 2\n0\n0\n1\n1\n");
    let target = write(dir.path(), "s", "2\n1 2 1\n");
    let out = dir.path().join("r");
    let v = json(&fkest(&["regularity", "--input", c4.to_str().unwrap(), "--parts", parts.to_str().unwrap()]));
    assert!(v["value"].as_f64().unwrap() >= 0.0 && v["exact"] == true);
    let v = json(&fkest(&[
        "round", "--input", c4.to_str().unwrap(), "--parts", parts.to_str().unwrap(), "--target",
        target.to_str().unwrap(), "--seed", "1", "--out", out.to_str().unwrap(),
    ]));
    // target density 1 adds the two missing cross pairs
    assert_eq!(v["edits"], 2);
    assert_eq!(fs::read_to_string(&out).unwrap().lines().next(), Some("4 6"));
}

#[test]
fn suite_outputs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.csv");
    for (path, format) in [(&a, "json"), (&b, "csv")] {
        let out = fkest(&["suite", "--scenario", "oracle-check", "--seed", "9", "--out", path.to_str().unwrap(), "--format", format]);
        assert!(out.status.success());
    }
    let lines: Vec<Value> = fs::read_to_string(&a).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 3);
    for key in ["id", "seed", "params", "verdict", "oracle_dist", "queries_edge", "queries_vertex", "wall_ms"] {
        assert!(lines[0].get(key).is_some(), "{key}");
    }
    let csv = fs::read_to_string(&b).unwrap();
    assert!(csv.starts_with("id,seed,verdict,oracle_dist,queries_edge,queries_vertex,wall_ms,params."));
    assert_eq!(csv.lines().count(), 4);
}
