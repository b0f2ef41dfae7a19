//! End-to-end checks of the command-line interface: exit codes, report
//! schema, and the documented fixture files.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stabsep"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_fixture(args: &[(&str, Option<&str>)]) -> Output {
    let mut argv: Vec<String> = Vec::new();
    for (a, f) in args {
        argv.push((*a).to_string());
        if let Some(name) = f {
            argv.push(fixture(name).display().to_string());
        }
    }
    let argv: Vec<&str> = argv.iter().map(|s| s.as_str()).collect();
    run(&argv)
}

fn report(output: &Output) -> serde_json::Value {
    serde_json::from_slice(&output.stdout).expect("stdout is a JSON report")
}

#[test]
fn analyze_ghz_report() {
    let out = run_fixture(&[("analyze", Some("ghz3.json"))]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["tool"], "stabsep");
    assert_eq!(r["command"], "analyze");
    assert!(r["tolerances"]["critical"].as_f64().is_some());
    assert_eq!(r["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
    assert_eq!(r["result"]["critical"], true);
    let f4 = r["result"]["invariants"][0]["abs"].as_f64().unwrap();
    assert!((f4 - 0.25).abs() < 1e-9);
    assert_eq!(r["result"]["consistent_with_null_cone"], false);
}

#[test]
fn analyze_w_flags_null_cone() {
    let out = run_fixture(&[("analyze", Some("w3.json"))]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["result"]["critical"], false);
    assert_eq!(r["result"]["consistent_with_null_cone"], true);
    let f4 = r["result"]["invariants"][0]["abs"].as_f64().unwrap();
    assert!(f4 < 1e-12);
}

#[test]
fn analyze_product_state() {
    let out = run_fixture(&[("analyze", Some("zero4.json"))]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["result"]["critical"], false);
    assert_eq!(r["result"]["consistent_with_null_cone"], true);
}

#[test]
fn convert_exit_codes() {
    // identical group elements: feasible, p concentrated on the identity
    let out = run_fixture(&[
        ("convert", None),
        ("--rep", Some("z_state.json")),
        ("--stab", Some("klein_stab.json")),
        ("--g1", Some("g_identity4.json")),
        ("--g2", Some("g_identity4.json")),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    assert_eq!(r["result"]["verdict"], "feasible");
    assert!((r["result"]["p"][0].as_f64().unwrap() - 1.0).abs() < 1e-9);

    // two-party diagonal stretch: infeasible with a twirl-residual witness
    let out = run_fixture(&[
        ("convert", None),
        ("--rep", Some("z_state.json")),
        ("--stab-catalog", None),
        ("klein4", None),
        ("--g1", Some("g_identity4.json")),
        ("--g2", Some("g_diag_double.json")),
    ]);
    assert_eq!(out.status.code(), Some(3));
    let r = report(&out);
    assert_eq!(r["result"]["verdict"], "infeasible");
    assert!(r["result"]["twirl_residual"].as_f64().unwrap() > 1e-3);

    // single-party stretch: feasible with a complete Kraus set
    let out = run_fixture(&[
        ("convert", None),
        ("--rep", Some("z_state.json")),
        ("--stab-catalog", None),
        ("klein4", None),
        ("--g1", Some("g_identity4.json")),
        ("--g2", Some("g_diag_single.json")),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert!(r["result"]["residual"].as_f64().unwrap() <= 1e-8);
    assert!(r["result"]["kraus_completeness_residual"].as_f64().unwrap() <= 1e-7);
}

#[test]
fn ensemble_command() {
    let out = run_fixture(&[
        ("ensemble", None),
        ("--rep", Some("z_state.json")),
        ("--stab-catalog", None),
        ("klein4", None),
        ("--g", Some("g_identity4.json")),
        ("--targets", Some("ensemble_targets.json")),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    assert_eq!(r["result"]["verdict"], "feasible");
}

#[test]
fn pmax_command_reports_all_bounds() {
    let out = run_fixture(&[
        ("pmax", None),
        ("--rep", Some("z_state.json")),
        ("--stab-catalog", None),
        ("klein4", None),
        ("--g1", Some("g_diag_single.json")),
        ("--g2", Some("g_identity4.json")),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    let lam_min = 0.25 / (17.0 / 8.0);
    assert_eq!(r["result"]["exact_reason"], "critical-target");
    assert!((r["result"]["exact"].as_f64().unwrap() - lam_min).abs() < 1e-9);
    for key in ["lower", "upper_vidal", "upper_twirl", "upper_psd"] {
        assert!(r["result"][key].as_f64().is_some(), "missing {key}");
    }
}

#[test]
fn bipartite_exit_codes() {
    let out = run_fixture(&[
        ("bipartite", None),
        ("--source", Some("schmidt_source.json")),
        ("--target", Some("schmidt_target.json")),
    ]);
    assert_eq!(out.status.code(), Some(0));

    // reversed direction is infeasible
    let out = run_fixture(&[
        ("bipartite", None),
        ("--source", Some("schmidt_target.json")),
        ("--target", Some("schmidt_source.json")),
    ]);
    assert_eq!(out.status.code(), Some(3));
    let r = report(&out);
    assert_eq!(r["result"]["verdict"], "infeasible");

    // rank increase is a different SLOCC class
    let out = run_fixture(&[
        ("bipartite", None),
        ("--source", Some("schmidt_rank2.json")),
        ("--target", Some("schmidt_source.json")),
    ]);
    assert_eq!(out.status.code(), Some(3));
    let r = report(&out);
    assert_eq!(r["result"]["verdict"], "different-slocc-class");

    // state files work as inputs too
    let out = run_fixture(&[
        ("bipartite", None),
        ("--source", Some("bell.json")),
        ("--target", Some("bell.json")),
    ]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn ghz_exit_codes() {
    let out = run_fixture(&[
        ("ghz", None),
        ("--g1", Some("g_identity3.json")),
        ("--g2", Some("g_diag3.json")),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["result"]["verdict"], "feasible");

    let out = run_fixture(&[
        ("ghz", None),
        ("--g1", Some("g_identity3.json")),
        ("--g2", Some("g_corner3.json")),
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn twirl_projector() {
    let out = run_fixture(&[
        ("twirl", None),
        ("--stab-catalog", None),
        ("klein4", None),
        ("--state", Some("zero4.json")),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    let entry = &r["result"]["twirled"][0][0];
    assert!((entry[0].as_f64().unwrap() - 0.5).abs() < 1e-12);
    let corner = &r["result"]["twirled"][15][15];
    assert!((corner[0].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert!((r["result"]["trace"][0].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn torus_twirl_of_ghz_projector() {
    let out = run_fixture(&[
        ("twirl", None),
        ("--torus", None),
        ("t", None),
        ("--state", Some("ghz3.json")),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    // the GHZ projector is torus-invariant
    let diag0 = r["result"]["twirled"][0][0][0].as_f64().unwrap();
    assert!((diag0 - 0.5).abs() < 1e-12);
}

#[test]
fn l_state_catalog_round_trip() {
    // the degree-2 invariant vanishes on the L state, so the twirl
    // characterization is inapplicable; the solver over the order-12
    // catalog group still decides conversions
    let out = run_fixture(&[("analyze", Some("l_state.json"))]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["result"]["critical"], true);
    assert!(r["result"]["invariants"][0]["abs"].as_f64().unwrap() < 1e-10);
    assert_eq!(r["result"]["consistent_with_null_cone"], true);

    let out = run_fixture(&[
        ("convert", None),
        ("--rep", Some("l_state.json")),
        ("--stab-catalog", None),
        ("l-state", None),
        ("--g1", Some("g_identity4.json")),
        ("--g2", Some("g_diag_single.json")),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    assert_eq!(r["result"]["verdict"], "feasible");
    assert_eq!(r["result"]["p"].as_array().unwrap().len(), 12);
}

#[test]
fn quiet_mode_and_report_file() {
    let dir = std::env::temp_dir().join("stabsep_cli_test");
    std::fs::create_dir_all(&dir).unwrap();
    let out_path = dir.join("report.json");
    let out = run(&[
        "--quiet",
        "--out",
        out_path.to_str().unwrap(),
        "analyze",
        fixture("ghz3.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let line = String::from_utf8_lossy(&out.stdout);
    assert_eq!(line.trim(), "analyze critical");
    let saved: serde_json::Value =
        serde_json::from_slice(&std::fs::read(&out_path).unwrap()).unwrap();
    assert_eq!(saved["command"], "analyze");
}

#[test]
fn determinism_across_runs() {
    let args = [
        ("pmax", None),
        ("--rep", Some("z_state.json")),
        ("--stab-catalog", None),
        ("klein4", None),
        ("--g1", Some("g_diag_single.json")),
        ("--g2", Some("g_identity4.json")),
    ];
    let a = run_fixture(&args);
    let b = run_fixture(&args);
    assert_eq!(a.stdout, b.stdout, "reports must be bit-identical");
}

#[test]
fn error_exit_codes() {
    // usage error
    let out = run(&["convert", "--rep", "missing-pieces.json"]);
    assert_eq!(out.status.code(), Some(1));

    // missing stabilizer source is a usage error, not invalid input
    let out = run(&[
        "convert",
        "--rep",
        fixture("z_state.json").to_str().unwrap(),
        "--g1",
        fixture("g_identity4.json").to_str().unwrap(),
        "--g2",
        fixture("g_identity4.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));

    // unreadable input
    let out = run(&["analyze", "/nonexistent/state.json"]);
    assert_eq!(out.status.code(), Some(2));

    // malformed JSON
    let dir = std::env::temp_dir().join("stabsep_cli_test");
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.json");
    std::fs::write(&bad, b"{ not json").unwrap();
    let out = run(&["analyze", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    // structurally invalid state (zero amplitudes)
    let zero = dir.join("zero_state.json");
    std::fs::write(
        &zero,
        br#"{"dims": [2], "amplitudes": [[0.0, 0.0], [0.0, 0.0]]}"#,
    )
    .unwrap();
    let out = run(&["analyze", zero.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn stabilizer_failing_its_reference_state_is_rejected() {
    // Klein elements against the W state (which they do not stabilize)
    let dir = std::env::temp_dir().join("stabsep_cli_test");
    std::fs::create_dir_all(&dir).unwrap();
    let klein: serde_json::Value =
        serde_json::from_slice(&std::fs::read(fixture("klein_stab.json")).unwrap()).unwrap();
    let zero4: serde_json::Value =
        serde_json::from_slice(&std::fs::read(fixture("zero4.json")).unwrap()).unwrap();
    let mut bad = klein.clone();
    bad["reference_state"] = zero4;
    let path = dir.join("bad_stab.json");
    std::fs::write(&path, serde_json::to_vec(&bad).unwrap()).unwrap();
    let out = run(&[
        "convert",
        "--rep",
        fixture("z_state.json").to_str().unwrap(),
        "--stab",
        path.to_str().unwrap(),
        "--g1",
        fixture("g_identity4.json").to_str().unwrap(),
        "--g2",
        fixture("g_identity4.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn unnormalized_input_warns() {
    let dir = std::env::temp_dir().join("stabsep_cli_test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("unnormalized.json");
    std::fs::write(
        &path,
        br#"{"dims": [2], "amplitudes": [[2.0, 0.0], [0.0, 0.0]]}"#,
    )
    .unwrap();
    let out = run(&["analyze", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert!(!r["warnings"].as_array().unwrap().is_empty());
}
