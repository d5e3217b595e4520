use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("sphereprobe-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(cache: &PathBuf, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sphereprobe"))
        .args(args)
        .env("SPHEREPROBE_CACHE_DIR", cache)
        .output()
        .unwrap()
}

fn lines(out: &Output) -> Vec<Value> {
    String::from_utf8(out.stdout.clone())
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

#[test]
fn census_is_idempotent() {
    let dir = scratch("census");
    let first = run(&dir, &["census"]);
    assert!(first.status.success());
    let summary = &lines(&first)[0];
    let layers: Vec<u64> = summary["layers"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).collect();
    assert!(layers.len() >= 4 && layers[..4].iter().all(|&n| n > 0));
    let path = PathBuf::from(summary["cache"].as_str().unwrap());
    let bytes = std::fs::read(&path).unwrap();
    std::fs::remove_file(&path).unwrap();
    assert!(run(&dir, &["census"]).status.success());
    assert_eq!(std::fs::read(&path).unwrap(), bytes);
    let header: Value = serde_json::from_slice(bytes.split(|&b| b == b'\n').next().unwrap()).unwrap();
    assert_eq!(header["format"], "sphereprobe-census");
    assert_eq!(header["curves"], summary["curves"]);
}

#[test]
fn verify_needs_a_matching_census() {
    let dir = scratch("missing");
    let out = run(&dir, &["--cap", "16", "verify", "girth"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sphereprobe census"));
    let file = dir.join("c16.jsonl");
    assert!(run(&dir, &["--cap", "16", "census", "--out", file.to_str().unwrap()]).status.success());
    let wrong = run(&dir, &["--cap", "18", "--census", file.to_str().unwrap(), "verify", "girth"]);
    assert_eq!(wrong.status.code(), Some(2));
    let right = run(&dir, &["--cap", "16", "--census", file.to_str().unwrap(), "verify", "girth"]);
    assert!(right.status.success());
}

#[test]
fn girth_report_envelope() {
    let dir = scratch("girth");
    assert!(run(&dir, &["census"]).status.success());
    let out = run(&dir, &["verify", "girth"]);
    assert_eq!(out.status.code(), Some(0));
    let ls = lines(&out);
    assert_eq!(ls[0]["suite"], "girth");
    assert_eq!(ls[0]["schema_version"], 1);
    let checks: Vec<&str> = ls[1..ls.len() - 1].iter().map(|r| r["check"].as_str().unwrap()).collect();
    assert_eq!(checks, ["no-triangles", "no-quadrilaterals", "five-cycles-are-pentagons"]);
    for r in &ls[1..3] {
        assert_eq!(r["detail"]["count"], 0);
    }
    assert_eq!(ls.last().unwrap()["summary"]["failed"], 0);
    assert_eq!(out.stdout, run(&dir, &["verify", "girth"]).stdout);
}

#[test]
fn triangle_monodromy_is_one() {
    let dir = scratch("monodromy");
    assert!(run(&dir, &["census"]).status.success());
    let out = run(&dir, &["verify", "bundle", "--check", "monodromy"]);
    assert!(out.status.success());
    let rec = &lines(&out)[1];
    assert_eq!(rec["detail"]["monodromy"], 1);
    assert_eq!(rec["detail"]["reversed_monodromy"], -1);
    let single = run(&dir, &["bundle", "monodromy", "--via", "3-4", "--via", "3-5", "--via", "4-5", "--via", "3-4"]);
    assert!(single.status.success());
    assert_eq!(lines(&single)[0]["value"].as_i64().unwrap().abs(), 1);
    let bad = run(&dir, &["verify", "bundle", "--check", "triangles"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn exports() {
    let dir = scratch("export");
    assert!(run(&dir, &["--cap", "16", "census"]).status.success());
    let dot = run(&dir, &["--cap", "16", "export", "--layers", "0-1"]);
    let text = String::from_utf8(dot.stdout).unwrap();
    assert!(text.starts_with("graph census {"));
    assert!(text.contains("kind=farey"));
    let empty = run(&dir, &["--cap", "16", "export", "--layers", "9-9", "--format", "graphml"]);
    let text = String::from_utf8(empty.stdout).unwrap();
    assert!(text.contains("<graphml") && !text.contains("<node"));
    let fibers = run(&dir, &["--cap", "16", "export", "--layers", "2-2", "--fibers"]);
    assert!(String::from_utf8(fibers.stdout).unwrap().contains("zeta="));
    let json = run(&dir, &["--cap", "16", "export", "--format", "json"]);
    assert_eq!(json.status.code(), Some(2));
}

#[test]
fn single_constructions() {
    let dir = scratch("single");
    assert!(run(&dir, &["census"]).status.success());
    let path = run(&dir, &["bundle", "s2path", "--from", "2-5", "--to", "1-5"]);
    assert!(path.status.success());
    assert_eq!(lines(&path)[0]["curves"].as_array().unwrap().len(), 4);
    let chart = run(&dir, &["bundle", "chart", "--base", "3-4"]);
    assert_eq!(lines(&chart)[0]["window"], 16);
    let lp = run(&dir, &["lowpath", "--pivot", "3-4", "--from", "2-5", "--to", "1-5"]);
    assert!(lp.status.success());
    let garbage = run(&dir, &["lowpath", "--pivot", "3-x", "--from", "2-5", "--to", "1-5"]);
    assert_eq!(garbage.status.code(), Some(2));
    let coords = run(&dir, &["bundle", "chart", "--base", "0,1,0,0,1,1,1,1,1"]);
    assert_eq!(lines(&coords)[0]["base"], lines(&chart)[0]["base"]);
}

#[test]
fn medium_on_six_punctures() {
    let dir = scratch("medium");
    let args = ["--surface", "s06", "--cap", "18", "--samples", "4"];
    assert!(run(&dir, &[&args[..], &["census"]].concat()).status.success());
    let out = run(&dir, &[&args[..], &["verify", "medium"]].concat());
    assert!(out.status.success());
    let ls = lines(&out);
    assert_eq!(ls.last().unwrap()["summary"]["failed"], 0);
    assert!(ls.iter().any(|r| r["check"] == "sphere-path"));
}
