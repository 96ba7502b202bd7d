use std::path::PathBuf;
use std::process::{Command, Output};

use confbetti::model::emit_raw_model;
use confbetti::ring::emit_ring;
use confbetti::{build_closed_oriented_model, presets};

fn confbetti(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_confbetti"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn golden(name: &str) -> String {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "core", "golden", name]
        .iter()
        .collect();
    path.to_string_lossy().into_owned()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn table4_golden_comparison_passes() {
    let out = confbetti(&[
        "run",
        "--preset",
        "product_p1_p1",
        "--k",
        "1..7",
        "--out",
        "table",
        "--compare",
        &golden("table4.golden"),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).starts_with("k j |  0  2  4  6  7"));
}

#[test]
fn table5_golden_comparison_passes() {
    let out = confbetti(&[
        "run",
        "--preset",
        "cpn(3)",
        "--k",
        "1..7",
        "--compare",
        &golden("table5.golden"),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn golden_mismatch_has_its_own_exit_code() {
    let out = confbetti(&[
        "run",
        "--preset",
        "cpn,3",
        "--k",
        "1..7",
        "--compare",
        &golden("table4.golden"),
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("differ from the golden table"));
}

#[test]
fn table_output_round_trips_as_golden_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("torus.golden");
    let first = confbetti(&["run", "--preset", "torus,2", "--k", "1..5"]);
    std::fs::write(&path, &first.stdout).unwrap();
    let again = confbetti(&[
        "run",
        "--preset",
        "torus,2",
        "--k",
        "1..5",
        "--compare",
        path.to_str().unwrap(),
    ]);
    assert_eq!(again.status.code(), Some(0));
    assert_eq!(first.stdout, again.stdout);
}

#[test]
fn sphere_report_has_strong_range_three() {
    let out = confbetti(&["run", "--preset", "sphere,2", "--k", "1..6", "--out", "report"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert_eq!(report["strong"], 3);
    assert!(report["poincare_shifted"].is_null());
    assert_eq!(report["certified_up_to"], 6);
    assert_eq!(report["cd"][2]["cd"], 3);
}

#[test]
fn report_with_fixed_length() {
    let out = confbetti(&[
        "run", "--preset", "p1p1", "--k", "1..12", "--out", "report", "--length", "5",
    ]);
    let report = json(&out);
    assert_eq!(report["shifted"], serde_json::json!({"r": 8, "sigma": 2, "q": 5}));
    assert_eq!(report["extended_shifted"], serde_json::json!({"r": 6, "sigma": 2}));
    assert_eq!(report["poincare_shifted"]["sigma"], 2);
}

#[test]
fn report_needs_a_range_from_one() {
    let out = confbetti(&["run", "--preset", "sphere,2", "--k", "2..6", "--out", "report"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn output_is_byte_stable_across_runs_and_thread_counts() {
    let args = [
        "run",
        "--preset",
        "surface,2",
        "--k",
        "1..6",
        "--out",
        "json",
        "--out",
        "csv",
        "--out",
        "report",
    ];
    let a = confbetti(&args);
    let b = confbetti(&args);
    let mut single: Vec<&str> = args.to_vec();
    single.extend(["--jobs", "1"]);
    let c = confbetti(&single);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn csv_and_json_agree() {
    let csv = stdout(&confbetti(&[
        "run", "--preset", "sphere,2", "--k", "2..3", "--out", "csv",
    ]));
    assert_eq!(csv, "k,i,j,b\n2,0,0,1\n3,0,0,1\n3,3,1,1\n");
    let tables = json(&confbetti(&[
        "run", "--preset", "sphere,2", "--k", "2..3", "--out", "json",
    ]));
    assert_eq!(tables[1]["betti"][1], serde_json::json!({"i": 3, "j": 1, "b": 1}));
    assert_eq!(tables[1]["provenance"]["method"], "knudsen-model");
}

#[test]
fn ring_file_input_uses_symmetric_powers_in_odd_dimension() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s3.json");
    std::fs::write(&path, emit_ring(&presets::sphere(3))).unwrap();
    let out = confbetti(&["run", "--ring", path.to_str().unwrap(), "--k", "1..3", "--out", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        stdout(&out),
        "k,i,j,b\n1,0,0,1\n1,3,0,1\n2,0,0,1\n2,3,0,1\n3,0,0,1\n3,3,0,1\n"
    );
}

#[test]
fn raw_model_input_matches_preset() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cp2.json");
    let model = build_closed_oriented_model(&presets::complex_projective(2)).unwrap();
    std::fs::write(&path, emit_raw_model(&model)).unwrap();
    let from_model = confbetti(&["run", "--raw-model", path.to_str().unwrap(), "--k", "1..5"]);
    let from_preset = confbetti(&["run", "--preset", "cpn,2", "--k", "1..5"]);
    assert_eq!(from_model.status.code(), Some(0));
    assert_eq!(from_model.stdout, from_preset.stdout);
}

#[test]
fn input_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["run", "--preset", "klein_bottle"],
        vec!["run", "--preset", "sphere"],
        vec!["run", "--preset", "sphere,2", "--k", "1..21"],
        vec!["run", "--preset", "sphere,2", "--k", "1..30", "--horizon-cap", "25"],
        vec!["run", "--preset", "sphere,2", "--k", "3..1"],
        vec!["run", "--ring", bad.to_str().unwrap()],
        vec!["run", "--raw-model", "/nonexistent/model.json"],
        vec!["run", "--preset", "sphere,2", "--ring", bad.to_str().unwrap()],
        vec!["run"],
        vec!["frobnicate"],
    ];
    for args in cases {
        let out = confbetti(&args);
        assert_eq!(
            out.status.code(),
            Some(1),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(out.stdout.is_empty(), "{args:?}");
    }
}

#[test]
fn horizon_cap_can_be_raised() {
    let out = confbetti(&[
        "run",
        "--preset",
        "sphere,2",
        "--k",
        "21..22",
        "--horizon-cap",
        "22",
        "--out",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "k,i,j,b\n21,0,0,1\n21,3,1,1\n22,0,0,1\n22,3,1,1\n");
}

#[test]
fn preset_listing() {
    let text = stdout(&confbetti(&["presets"]));
    for name in [
        "sphere",
        "complex_projective",
        "product_p1_p1",
        "torus",
        "surface",
        "rational_projective_plane",
        "point",
    ] {
        assert!(text.lines().any(|l| l == name), "{name} missing");
    }
    let listing = json(&confbetti(&["presets", "--json"]));
    assert_eq!(listing.as_array().unwrap().len(), 7);
    assert_eq!(listing[0]["name"], "sphere");
}

#[test]
fn help_exits_cleanly() {
    let out = confbetti(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("run"));
}
