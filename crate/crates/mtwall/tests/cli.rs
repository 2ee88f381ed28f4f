//! End-to-end runs of the `mtwall` binary on the bundled example maps.

use serde_json::Value;
use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("mtwall-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn mtwall(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mtwall"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}); stderr: {}",
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn ex(name: &str) -> String {
    data(name).to_string_lossy().into_owned()
}

#[test]
fn analyze_reports_golden_ratio() {
    let out = mtwall(&["analyze", "--input", &ex("ex2.json")]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["schema"], "mtwall/analyze");
    assert_eq!(r["version"], 1);
    let lambda = r["strata"][0]["lambda"].as_f64().unwrap();
    assert!((lambda - 1.618034).abs() < 1e-6, "{lambda}");
    assert_eq!(r["illegal_turns"], serde_json::json!([["A", "B"]]));
}

#[test]
fn verify_ex1_has_no_violation() {
    let out = mtwall(&["verify", "--input", &ex("ex1.json")]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    for part in ["rtt", "improved"] {
        assert_eq!(r[part]["ok"], true);
        for item in r[part]["items"].as_array().unwrap() {
            assert_ne!(item["status"], "violated", "{item}");
        }
    }
    let rtt = r["rtt"]["items"].as_array().unwrap();
    assert!(rtt.iter().all(|i| i["status"] == "verified"));
}

#[test]
fn atoroidal_witness_sets_exit_status() {
    let out = mtwall(&["atoroidal", "--input", &ex("ex1.json"), "--bound", "4", "--iter", "2"]);
    assert_eq!(out.status.code(), Some(1));
    let r = report(&out);
    assert_eq!(r["witness"]["word"], "a");
    assert_eq!(r["witness"]["k"], 1);
}

#[test]
fn torus_and_flow() {
    let out = mtwall(&["torus", "--input", &ex("theta.json"), "-L", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["euler_characteristic"], 0);

    let out = mtwall(&["flow", "--input", &ex("ex2.json"), "--point", "a:2/3", "-L", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    let orbit = r["orbit"].as_array().unwrap();
    assert_eq!(orbit.first(), orbit.last());
    assert_eq!(r["tunnel"]["leaves"], 3);

    let out = mtwall(&[
        "flow",
        "--input",
        &ex("ex2.json"),
        "--point",
        "a:2/3",
        "--format",
        "dot",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("digraph tunnel {"));
}

#[test]
fn schema_errors_carry_pointers() {
    let text = std::fs::read_to_string(data("ex2.json"))
        .unwrap()
        .replace("\"ab\"", "\"aZ\"");
    let path = scratch("bad_word.json");
    std::fs::write(&path, text).unwrap();
    let out = mtwall(&["analyze", "--input", &path.to_string_lossy()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/edge_map/b"));

    let path = scratch("bad_member.json");
    std::fs::write(
        &path,
        r#"{"vertices": ["v"], "edges": [{"name": "a", "src": "v", "dst": "u"}]}"#,
    )
    .unwrap();
    let out = mtwall(&["analyze", "--input", &path.to_string_lossy()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/edges/0/dst"));
}

#[test]
fn usage_errors() {
    assert_eq!(mtwall(&["analyze"]).status.code(), Some(2));
    assert_eq!(
        mtwall(&["frobnicate", "--input", &ex("ex2.json")]).status.code(),
        Some(2)
    );
    let out = mtwall(&["analyze", "--input", &ex("ex2.json"), "--format", "dot"]);
    assert_eq!(out.status.code(), Some(2));
    let out = mtwall(&["flow", "--input", &ex("ex2.json"), "--point", "a:3/2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn vertex_cap_is_a_resource_failure() {
    let out = mtwall(&["ball", "--input", &ex("ex2.json"), "--radius", "40"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn ball_without_inverse_is_upward_only() {
    let text = std::fs::read_to_string(data("ex2.json")).unwrap();
    let mut doc: Value = serde_json::from_str(&text).unwrap();
    doc.as_object_mut().unwrap().remove("inverse_map");
    let path = scratch("no_inverse.json");
    std::fs::write(&path, doc.to_string()).unwrap();
    let out = mtwall(&["ball", "--input", &path.to_string_lossy(), "--radius", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["upward_only"], true);
    let out = mtwall(&["ball", "--input", &ex("ex2.json"), "--radius", "2"]);
    assert_eq!(report(&out)["upward_only"], false);
}

#[test]
fn outputs_are_byte_identical_and_written_to_out() {
    let dir = scratch("out");
    let args = ["wall", "--input", &ex("ex2.json"), "--out", &dir.to_string_lossy()];
    assert_eq!(mtwall(&args).status.code(), Some(0));
    let first = std::fs::read(dir.join("wall.json")).unwrap();
    assert_eq!(mtwall(&args).status.code(), Some(0));
    assert_eq!(first, std::fs::read(dir.join("wall.json")).unwrap());
    let r: Value = serde_json::from_slice(&first).unwrap();
    assert_eq!(r["cocycle"]["ok"], true);
    assert_eq!(r["primaries"][0]["s"], "2/3");

    let a = mtwall(&["ball", "--input", &ex("ex2.json"), "--radius", "2.5", "--format", "dot"]);
    let b = mtwall(&["ball", "--input", &ex("ex2.json"), "--radius", "2.5", "--format", "dot"]);
    assert_eq!(a.stdout, b.stdout);
    assert!(String::from_utf8_lossy(&a.stdout).starts_with("digraph ball {"));
}

#[test]
fn dual_of_two_crossing_walls_is_a_square() {
    let out = mtwall(&["dual", "--input", &ex("ex2.json"), "-L", "3", "--level", "0"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    assert_eq!(r["vertices"].as_array().unwrap().len(), 4);
    assert_eq!(r["edges"].as_array().unwrap().len(), 4);
    assert_eq!(r["squares"], 1);
}

#[test]
fn cut_parity_matches_sides() {
    let out = mtwall(&[
        "cut",
        "--input",
        &ex("ex2.json"),
        "-L",
        "3",
        "--seed",
        "11",
        "--samples",
        "8",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    assert_eq!(r["seed"], 11);
    assert_eq!(r["sides"]["classes"], 2);
    assert_eq!(r["mismatches"], 0);
    assert_eq!(r["samples"].as_array().unwrap().len(), 8);
}
