mod common;

use common::{config_path, killingflow, read_json, validate};
use proptest::prelude::*;
use serde_json::Value;

fn json(stdout: &str) -> Value {
    serde_json::from_str(stdout).unwrap_or_else(|e| panic!("not JSON ({e}):\n{stdout}"))
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let out = killingflow(&["bogus"]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("Usage"), "{}", out.stderr);
    assert_eq!(killingflow::<&str>(&[]).code, 2);
    assert_eq!(killingflow(&["--help"]).code, 0);
}

#[test]
fn cmc_csv_has_the_hemisphere() {
    let out = killingflow(&["cmc", "--model", "euclidean", "--n", "2", "--R", "1", "--grid", "256"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let mut reader = csv::Reader::from_reader(out.stdout.as_bytes());
    assert_eq!(reader.headers().unwrap(), vec!["r", "v", "vp"]);
    let rows: Vec<Vec<f64>> = reader
        .records()
        .map(|r| r.unwrap().iter().map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 256);
    let row = rows.iter().find(|row| (row[0] - 0.6).abs() < 1e-12).expect("r = 0.6 is a node");
    assert!((row[1] - 0.8).abs() < 1e-7, "v(0.6) = {}", row[1]);
}

#[test]
fn bad_config_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "[model]\nkind = \"euclidean\"\n[grid]\nntheta = 3\n").unwrap();
    let out = killingflow(&["flow".as_ref(), "--config".as_ref(), path.as_os_str()]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("grid.ntheta"), "{}", out.stderr);
    let out = killingflow(&["flow", "--config", "/nonexistent/config.toml"]);
    assert_eq!(out.code, 2);
}

#[test]
fn bad_expression_is_a_usage_error() {
    let out = killingflow(&["exhaust", "--model", "euclidean", "--phi", "cos(theta"]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("offset 9"), "{}", out.stderr);
    let out = killingflow(&["exhaust", "--model", "euclidean", "--phi", "cos(phi)"]);
    assert_eq!(out.code, 2);
}

#[test]
fn verify_demo_passes_and_matches_schema() {
    let out = killingflow(&[
        "verify".as_ref(),
        "--all".as_ref(),
        "--config".as_ref(),
        config_path("demo.toml").as_os_str(),
    ]);
    assert_eq!(out.code, 0, "{}\n{}", out.stdout, out.stderr);
    let report = json(&out.stdout);
    validate("verify", &report).unwrap();
    assert_eq!(report["checks"].as_array().unwrap().len(), 9);
}

#[test]
fn model_info_matches_schema() {
    for args in [
        vec!["model-info", "--model", "euclidean", "--R", "2"],
        vec!["model-info", "--model", "hyperbolic", "--rho", "cosh", "--R", "1.5"],
        vec!["model-info", "--model", "euclidean", "--n", "3"],
    ] {
        let out = killingflow(&args);
        assert_eq!(out.code, 0, "{}", out.stderr);
        validate("model_info", &json(&out.stdout)).unwrap();
    }
}

#[test]
fn barrier_matches_schema() {
    for model in ["euclidean", "hyperbolic"] {
        let out = killingflow(&["barrier", "--model", model, "--r0", "1", "--T", "0.3"]);
        assert_eq!(out.code, 0, "{}", out.stderr);
        let report = json(&out.stdout);
        validate("barrier", &report).unwrap();
        assert_eq!(report["pass"], Value::Bool(true));
        assert_eq!(report["constants"]["sc_barrier"].is_null(), model == "euclidean");
    }
}

#[test]
fn flow_writes_a_valid_run() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("u.svg");
    let out = killingflow(&[
        "--out".as_ref(),
        dir.path().as_os_str(),
        "--svg".as_ref(),
        svg.as_os_str(),
        "flow".as_ref(),
        "--config".as_ref(),
        config_path("demo.toml").as_os_str(),
    ]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let report = json(&out.stdout);
    validate("flow", &report).unwrap();
    let manifest = read_json(&dir.path().join("manifest.json"));
    validate("manifest", &manifest).unwrap();
    for entry in manifest["snapshots"].as_array().unwrap() {
        assert!(dir.path().join(entry["file"].as_str().unwrap()).exists());
    }
    assert!(std::fs::read_to_string(&svg).unwrap().starts_with("<svg"));
}

#[test]
fn exhaust_matches_schema_and_fails_on_tight_tolerance() {
    let out = killingflow(&["exhaust", "--model", "euclidean", "--phi", "0.5*cos(theta)", "--rungs", "2"]);
    let report = json(&out.stdout);
    validate("exhaust", &report).unwrap();
    // Two rungs leave d_1 ~ 3e-2 above the default tolerance.
    assert_eq!(report["verdict"], Value::Bool(false));
    assert_eq!(out.code, 1);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("zero.toml");
    std::fs::write(
        &path,
        "[model]\nkind = \"hyperbolic\"\n[problem]\nphi = \"0\"\n[exhaust]\nrungs = 2\n",
    )
    .unwrap();
    let out = killingflow(&["exhaust".as_ref(), "--config".as_ref(), path.as_os_str()]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let report = json(&out.stdout);
    validate("exhaust", &report).unwrap();
    assert_eq!(report["d"][0].as_f64(), Some(0.0));
}

#[test]
fn thread_variable_is_validated() {
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_killingflow"))
        .args(["model-info", "--model", "euclidean"])
        .env("KILLINGFLOW_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

const CORPUS: &[&str] = &[
    "model-info",
    "cmc",
    "barrier",
    "flow",
    "bogus",
    "",
    "-",
    "--",
    "--help",
    "--version",
    "--model",
    "euclidean",
    "hyperbolic",
    "spherical",
    "--n",
    "2",
    "3",
    "0",
    "-1",
    "abc",
    "--R",
    "1",
    "-2",
    "nan",
    "inf",
    "1e400",
    "--grid",
    "8",
    "64",
    "--rho",
    "cosh",
    "one",
    "missing.csv",
    "--kappa",
    "--r0",
    "--T",
    "0.1",
    "--l0",
    "--M",
    "--k",
    "17",
    "--seed",
    "7",
    "--config",
    "nope.toml",
    "--check",
    "cmc",
    "--out",
    "/nonexistent/dir/report.json",
    "--svg",
    "\u{00e9}",
    "--all",
];

fn argv() -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(prop::sample::select(CORPUS), 0..7).prop_map(|v| v.into_iter().map(String::from).collect())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn fuzzed_argv_never_panics(args in argv()) {
        let out = killingflow(&args);
        prop_assert!([0, 1, 2].contains(&out.code), "exit {} for {:?}", out.code, args);
        prop_assert!(!out.stderr.contains("panicked"), "{:?}: {}", args, out.stderr);
    }
}

#[test]
fn malformed_expensive_commands_exit_two() {
    for args in [
        vec!["exhaust", "--rungs", "x"],
        vec!["exhaust", "--rungs", "1"],
        vec!["exhaust", "--model", "euclidean", "--phi", "r"],
        vec!["verify", "--check", "bogus"],
        vec!["verify", "--config", "nope.toml"],
        vec!["flow"],
    ] {
        let out = killingflow(&args);
        assert_eq!(out.code, 2, "{args:?}: {}", out.stderr);
        assert!(!out.stderr.contains("panicked"));
    }
}
