mod common;

use std::process::{Command, Output};

use common::fixture;
use serde_json::{json, Value};

fn wander(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wander"))
        .args(args)
        .env_remove("WANDER_LLM_MODE")
        .env("RUST_LOG", "error")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path(p: &std::path::Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn validate_reports_the_collection() {
    let o = wander(&["validate", path(&fixture("museum35.json"))]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("35 artworks, all reachable"), "{}", stdout(&o));
}

#[test]
fn validate_missing_file_exits_2() {
    let o = wander(&["validate", "/definitely/not/here.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("cannot read"));
}

#[test]
fn validate_names_the_unreachable_artwork() {
    let doc = json!({
        "schema": 1,
        "bounds": {"w": 10.0, "h": 6.0},
        "spawn": [2.0, 3.0],
        "obstacles": [[[4.8, 0.0], [5.2, 0.0], [5.2, 6.0], [4.8, 6.0]]],
        "artworks": [
            {"id": "painting 000", "name": "Near", "author": "A", "year": 1500, "style": "S",
             "description": "d", "position": [0.3, 3.0, 1.5], "facing": [1.0, 0.0], "popularity": 1.0},
            {"id": "painting 001", "name": "Walled Off", "author": "A", "year": 1500, "style": "S",
             "description": "d", "position": [9.7, 3.0, 1.5], "facing": [-1.0, 0.0], "popularity": 1.0}
        ]
    });
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("split.json");
    std::fs::write(&file, doc.to_string()).unwrap();
    let o = wander(&["validate", path(&file)]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    assert!(stderr(&o).contains("painting 001"), "{}", stderr(&o));
}

#[test]
fn replay_reference_transcript_passes() {
    let o = wander(&["replay", path(&fixture("appendix.json"))]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).contains("4/4 turns passed"));
}

#[test]
fn replay_mismatch_fails_with_a_diff() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("wrong.json");
    let t = json!({"turns": [{"utterance": "How many paintings are in this museum?", "expect": {"combo": "C5"}}]});
    std::fs::write(&file, t.to_string()).unwrap();
    let o = wander(&[
        "replay",
        path(&file),
        "--museum",
        path(&fixture("museum35.json")),
        "--rules",
        path(&fixture("scripted_rules.json")),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("combo: expected C5, got C2"), "{}", stdout(&o));
}

#[test]
fn replay_empty_transcript_passes_with_warning() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("empty.json");
    std::fs::write(&file, r#"{"turns": []}"#).unwrap();
    let o = wander(&[
        "replay",
        path(&file),
        "--museum",
        path(&fixture("museum35.json")),
        "--rules",
        path(&fixture("scripted_rules.json")),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("warning"));
}

#[test]
fn route_dumps_a_path() {
    let o = wander(&[
        "route",
        "--museum",
        path(&fixture("museum35.json")),
        "--from",
        "5,10",
        "--to",
        "The Birth of Venus",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["to"], "painting 007");
    assert!(v["length"].as_f64().unwrap() > 9.0);
    let o = wander(&["route", "--museum", path(&fixture("museum35.json")), "--from", "5,10", "--to", "Nope"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn serve_refuses_a_bad_museum() {
    let o = wander(&["serve", "--museum", "/definitely/not/here.json", "--port", "0"]);
    assert_ne!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("invalid museum"));
}
