use std::path::{Path, PathBuf};
use std::process::Command as Process;

use floer_cli::{run, Command, RunOptions};
use serde_json::{json, Value};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn floer(args: &[&str]) -> (i32, String) {
    let out = Process::new(env!("CARGO_BIN_EXE_floer")).args(args).output().expect("binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8(out.stdout).unwrap())
}

fn report(command: Command, name: &str) -> (Value, i32) {
    let o = run(command, &fixture(name), &RunOptions::default());
    (o.report, o.exit_code)
}

fn ranks(v: &Value) -> Vec<u64> {
    v["ranks"].as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).collect()
}

#[test]
fn hf_map_fixtures() {
    let (r, code) = report(Command::HfMap, "hyperelliptic_genus2.json");
    assert_eq!(code, 0);
    assert_eq!(ranks(&r["results"]["hf"]), vec![6, 0, 0]);
    assert_eq!(r["results"]["nielsen_number"], json!(6));
    let (r, code) = report(Command::HfMap, "identity_genus2.json");
    assert_eq!((code, ranks(&r["results"]["hf"])), (0, vec![1, 4, 1]));
    let (r, code) = report(Command::HfMap, "parallel_opposite_twists.json");
    assert_eq!(code, 2);
    assert_eq!(r["stages"]["validation"]["violations"][0]["clause"], json!("(4)"));
}

#[test]
fn hf_sing_fixtures() {
    let (r, code) = report(Command::HfSing, "trefoil.json");
    assert_eq!(code, 0);
    assert_eq!(ranks(&r["results"]["hf"]), vec![0, 2, 1]);
    assert_eq!(ranks(&r["results"]["hf_plus"]), vec![0, 0, 0]);
    assert_eq!(r["stages"]["verification"]["passed"], json!(true));
    let (r, code) = report(Command::HfSing, "quadratic_irrational.json");
    assert_eq!(code, 3);
    assert!(r["errors"][0]["hint"].as_str().unwrap().contains("puiseux_data"));
    let (r, code) = report(Command::HfSing, "node_puiseux.json");
    assert_eq!(code, 0);
    assert_eq!(ranks(&r["results"]["hf"]), vec![0, 3, 1]);
}

#[test]
fn splice_reports_weights_and_properties() {
    let (r, code) = report(Command::Splice, "cable.json");
    assert_eq!(code, 0);
    let weights: Vec<Value> = r["stages"]["collapsed_diagram"]["edges"].as_array().unwrap().iter().flat_map(|e| e["weights"].as_array().unwrap().clone()).collect();
    assert!(weights.contains(&json!(13)));
    assert!(r["stages"]["properties"].as_array().unwrap().iter().all(|p| p["passed"] == json!(true)));
    let (r, _) = report(Command::Splice, "node_polynomial.json");
    assert_eq!(r["results"]["gamma_star"], json!(true));
    assert_eq!(r["results"]["characteristic_set"], json!(["(0, 1, 2; 1)"]));
}

#[test]
fn puiseux_data_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["trefoil.json", "cable.json", "e7.json", "two_cusps.json", "a4.json"] {
        let (r, _) = report(Command::Splice, name);
        let mut doc = r["stages"]["puiseux_data"].clone();
        doc["kind"] = json!("puiseux_data");
        doc["schema_version"] = json!(1);
        let path = dir.path().join(name);
        std::fs::write(&path, serde_json::to_string(&doc).unwrap()).unwrap();
        let again = run(Command::Splice, &path, &RunOptions::default()).report;
        assert_eq!(again["stages"]["characteristic_set"], r["stages"]["characteristic_set"], "{name}");
    }
}

#[test]
fn binary_exit_codes_and_dot_output() {
    let dir = tempfile::tempdir().unwrap();
    let dot = dir.path().join("trefoil.dot");
    let (code, _) = floer(&["splice", fixture("trefoil.json").to_str().unwrap(), "--dot", dot.to_str().unwrap()]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(&dot).unwrap();
    assert!(text.starts_with("graph splice {") && text.contains("shape=circle"));

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"kind\": \"polynomial\"}").unwrap();
    assert_eq!(floer(&["splice", bad.to_str().unwrap()]).0, 1);
    std::fs::write(&bad, "{\"kind\": \"polynomial\", \"poly\": \"x^2 + * y\"}").unwrap();
    assert_eq!(floer(&["splice", bad.to_str().unwrap()]).0, 1);
    std::fs::write(&bad, "{\"kind\": \"polynomial\", \"poly\": \"x + y^2\"}").unwrap();
    assert_eq!(floer(&["splice", bad.to_str().unwrap()]).0, 2);
    assert_eq!(floer(&["hf-map", fixture("parallel_opposite_twists.json").to_str().unwrap()]).0, 2);
    assert_eq!(floer(&["hf-sing", fixture("quadratic_irrational.json").to_str().unwrap()]).0, 3);
}

#[test]
fn embedding_flag_overrides_options() {
    let (code, out) = floer(&["--json", "hf-sing", fixture("trefoil.json").to_str().unwrap(), "--embedding", fixture("embedding_genus3.json").to_str().unwrap()]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["results"]["embedding"]["closed_genus"], json!(3));
    assert_eq!(ranks(&v["results"]["hf"]), vec![0, 4, 1]);
}

#[test]
fn parallel_jobs_keep_input_order() {
    let files = ["identity_genus2.json", "identity_genus3.json", "hyperelliptic_genus2.json", "dehn_twist_genus2.json"];
    let paths: Vec<String> = files.iter().map(|f| fixture(f).display().to_string()).collect();
    let mut serial = vec!["hf-map"];
    serial.extend(paths.iter().map(String::as_str));
    let mut parallel = vec!["--jobs", "4"];
    parallel.extend(serial.iter().copied());
    let (c1, a) = floer(&serial);
    let (c2, b) = floer(&parallel);
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(a, b);
    let positions: Vec<usize> = files.iter().map(|f| a.find(f).unwrap()).collect();
    assert!(positions.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn validate_accepts_every_kind() {
    for (name, expected) in [("identity_genus2.json", 0), ("parallel_opposite_twists.json", 2), ("cable.json", 0), ("node_puiseux.json", 0), ("a4.json", 0)] {
        assert_eq!(report(Command::Validate, name).1, expected, "{name}");
    }
}
