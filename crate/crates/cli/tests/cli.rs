use std::path::Path;
use std::process::{Command, Output};

fn scarce(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scarce")).args(args).output().expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

#[test]
fn simulate_writes_all_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = scarce(&["simulate", "--preset", "singapore", "--seed", "3", "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["trace.jsonl", "outcome.json", "metrics.json", "run.json"] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    let run: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("run.json")).unwrap()).unwrap();
    assert_eq!(run["seed"], 3);
    assert_eq!(run["violations"], 0);
}

#[test]
fn unknown_subcommand_is_invalid_input() {
    assert_eq!(scarce(&["frobnicate"]).status.code(), Some(1));
}

#[test]
fn sweep_has_grid_times_seeds_rows() {
    let dir = tempfile::tempdir().unwrap();
    let o = scarce(&["sweep", "--seeds", "0,1,2", "--out", s(dir.path())]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut r = csv::Reader::from_path(dir.path().join("sweep.csv")).unwrap();
    let header = r.headers().unwrap().clone();
    let tail: Vec<&str> = header.iter().skip(header.len() - 6).collect();
    assert_eq!(tail, ["avg_size", "avg_wt", "sw", "var_size", "rop", "co_gini"]);
    assert_eq!(r.records().count(), 27);
}

#[test]
fn conflicting_scenario_sources_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"scenario_path": "x.json", "scenario_spec": {}}"#).unwrap();
    let o = scarce(&["simulate", "--config", s(&cfg), "--out", s(dir.path())]);
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn unknown_config_keys_are_listed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"seedz": [1], "engine": {"max_roundz": 3}}"#).unwrap();
    let o = scarce(&["simulate", "--config", s(&cfg)]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("seedz") && err.contains("max_roundz"), "{err}");
}

#[test]
fn missing_files_are_io_errors() {
    let dir = tempfile::tempdir().unwrap();
    let o = scarce(&["simulate", "--config", s(&dir.path().join("nope.json"))]);
    assert_eq!(o.status.code(), Some(2));
    let o = scarce(&["report", s(&dir.path().join("nope"))]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn report_merges_runs_and_sweeps() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    let sweep = dir.path().join("sweep");
    assert!(scarce(&["simulate", "--preset", "beijing", "--out", s(&run)]).status.success());
    assert!(scarce(&["sweep", "--seed", "0", "--out", s(&sweep)]).status.success());
    let target = dir.path().join("merged.csv");
    let o = scarce(&["report", s(&run), s(&sweep), "--out", s(&target)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut r = csv::Reader::from_path(&target).unwrap();
    assert_eq!(&r.headers().unwrap()[0], "source");
    assert_eq!(r.records().count(), 1 + 9);
}

#[test]
fn baseline_reports_bound() {
    let dir = tempfile::tempdir().unwrap();
    assert!(scarce(&["baseline", "--out", s(dir.path())]).status.success());
    let b: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("baseline.json")).unwrap()).unwrap();
    assert!(b["km_sw"].as_f64().unwrap() > 0.0);
}
