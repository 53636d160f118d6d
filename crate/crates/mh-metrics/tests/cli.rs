//! End to end tests of the command line binary: exit codes, stream
//! discipline (JSON or scalars on stdout, diagnostics on stderr), and
//! byte-level determinism of file outputs.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_mh-metrics")
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .env_remove("MH_METRICS_SEED")
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn path_str(p: &Path) -> String {
    p.to_str().unwrap().to_string()
}

#[test]
fn analyze_reports_counts_table_as_json() {
    let out = run(&[
        "analyze",
        &path_str(&data("table1a.csv")),
        "--lambda",
        "0.5",
    ]);
    let doc = stdout_json(&out);
    assert_eq!(doc["schemaVersion"], 1);
    assert_eq!(doc["input"]["source"], "counts");
    assert_eq!(doc["input"]["n"], 166);
    assert_eq!(doc["input"]["r"], 5);
    assert!((doc["gammaTotal"].as_f64().unwrap() - 0.308).abs() < 1e-3);

    let inf = &doc["inference"];
    assert_eq!(inf["estimatorUsed"], "sample");
    assert!(inf.get("alpha").is_none(), "sample carries no alpha");
    assert!((inf["estimate"].as_f64().unwrap() - 0.308).abs() < 1e-3);
    assert!((inf["se"].as_f64().unwrap() - 0.078).abs() < 2e-3);
    assert!((inf["ciLow"].as_f64().unwrap() - 0.156).abs() < 2e-3);
    assert!((inf["ciHigh"].as_f64().unwrap() - 0.460).abs() < 2e-3);
    assert_eq!(inf["degenerateWarning"], false);

    // Requested extra order joins the default 0 in sorted order.
    let lambdas: Vec<f64> = doc["phi"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["lambda"].as_f64().unwrap())
        .collect();
    assert_eq!(lambdas, vec![0.0, 0.5]);
}

#[test]
fn analyze_auto_smooths_boundary_tables() {
    let out = run(&["analyze", &path_str(&data("table1b.csv"))]);
    let doc = stdout_json(&out);
    let inf = &doc["inference"];
    assert_eq!(inf["estimatorUsed"], "bayes");
    assert!((inf["alpha"].as_f64().unwrap() - 1e-4).abs() < 1e-12);
    assert!((inf["estimate"].as_f64().unwrap() - 0.511).abs() < 1e-3);
    assert!((inf["se"].as_f64().unwrap() - 0.059).abs() < 2e-3);
}

#[test]
fn analyze_probability_input_skips_inference() {
    let out = run(&["analyze", &path_str(&data("table2_probs.csv")), "--probs"]);
    let doc = stdout_json(&out);
    assert_eq!(doc["input"]["source"], "probabilities");
    assert!(doc["input"].get("n").is_none());
    assert!(doc.get("inference").is_none());
    assert!((doc["gammaTotal"].as_f64().unwrap() - 0.483).abs() < 1e-3);
}

#[test]
fn analyze_undefined_measure_is_exit_3() {
    let out = run(&["analyze", &path_str(&data("diag_only.csv"))]);
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("measure undefined: Δ = 0"),
        "stderr was: {stderr}"
    );
    assert!(out.stdout.is_empty(), "no partial output on stdout");
}

#[test]
fn analyze_sample_estimator_at_boundary_is_exit_3() {
    let out = run(&[
        "analyze",
        &path_str(&data("table1b.csv")),
        "--estimator",
        "sample",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn conflicting_flags_are_exit_2() {
    let table = path_str(&data("table1a.csv"));
    let probs = path_str(&data("table2_probs.csv"));

    let out = run(&["analyze", &table, "--alpha", "0.5"]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["analyze", &probs, "--probs", "--estimator", "bayes"]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["analyze", "/no/such/file.csv"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unwritable_output_is_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("not_a_dir/report.json");
    let out = run(&[
        "analyze",
        &path_str(&data("table1a.csv")),
        "--out",
        &path_str(&missing),
    ]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn clip_ci_clamps_into_unit_interval() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("small.csv");
    std::fs::write(&table, "2,3\n1,2\n").unwrap();

    let raw = stdout_json(&run(&["analyze", &path_str(&table)]));
    assert!(raw["inference"]["ciLow"].as_f64().unwrap() < 0.0);

    let clipped = stdout_json(&run(&["analyze", &path_str(&table), "--clip-ci"]));
    assert_eq!(clipped["inference"]["ciLow"].as_f64().unwrap(), 0.0);
    assert_eq!(
        raw["inference"]["ciHigh"],
        clipped["inference"]["ciHigh"],
        "in-range endpoint untouched"
    );
}

#[test]
fn viz_writes_svg_file() {
    let dir = tempfile::tempdir().unwrap();
    let svg_path = dir.path().join("out.svg");
    let out = run(&[
        "viz",
        &path_str(&data("table1a.csv")),
        "-o",
        &path_str(&svg_path),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty(), "svg goes to the file, not stdout");

    let svg = std::fs::read_to_string(&svg_path).unwrap();
    assert!(svg.starts_with("<svg "));
    assert!(svg.trim_end().ends_with("</svg>"));
    // 5x5 table: four diagonal panels, each with its dashed two-color locus.
    assert_eq!(svg.matches("<rect").count(), 4);
    assert_eq!(svg.matches("stroke-dasharray").count(), 8);
}

#[test]
fn viz_renders_undefined_cuts_as_na_panels() {
    let dir = tempfile::tempdir().unwrap();
    let svg_path = dir.path().join("diag.svg");
    let out = run(&[
        "viz",
        &path_str(&data("diag_only.csv")),
        "-o",
        &path_str(&svg_path),
    ]);
    assert!(out.status.success(), "fully diagonal table still renders");
    let svg = std::fs::read_to_string(&svg_path).unwrap();
    assert_eq!(svg.matches(">n/a</text>").count(), 2);
    assert_eq!(svg.matches("<circle").count(), 0);
}

#[test]
fn viz_accepts_style_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let style_path = dir.path().join("style.json");
    std::fs::write(&style_path, r##"{"canvas": 320.0, "red": "#aa0000"}"##).unwrap();
    let svg_path = dir.path().join("styled.svg");
    let out = run(&[
        "viz",
        &path_str(&data("table4b.csv")),
        "-o",
        &path_str(&svg_path),
        "--style",
        &path_str(&style_path),
    ]);
    assert!(out.status.success());
    let svg = std::fs::read_to_string(&svg_path).unwrap();
    assert!(svg.contains("width=\"320.0000\""));
    assert!(svg.contains("#aa0000"));

    let bad_style = dir.path().join("bad.json");
    std::fs::write(&bad_style, "{not json").unwrap();
    let out = run(&[
        "viz",
        &path_str(&data("table4b.csv")),
        "-o",
        &path_str(&svg_path),
        "--style",
        &path_str(&bad_style),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_output_is_byte_identical_across_workers() {
    let dir = tempfile::tempdir().unwrap();
    let one = dir.path().join("w1.json");
    let eight = dir.path().join("w8.json");
    let base = [
        "simulate", "--d", "0.5", "--n", "36", "--trials", "64", "--seed", "11",
    ];

    let mut args: Vec<&str> = base.to_vec();
    let one_s = path_str(&one);
    args.extend_from_slice(&["--workers", "1", "--out", &one_s]);
    assert!(run(&args).status.success());

    let mut args: Vec<&str> = base.to_vec();
    let eight_s = path_str(&eight);
    args.extend_from_slice(&["--workers", "8", "--out", &eight_s]);
    assert!(run(&args).status.success());

    let a = std::fs::read(&one).unwrap();
    let b = std::fs::read(&eight).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, b, "worker count must not leak into the document");
}

#[test]
fn simulate_range_matches_explicit_list() {
    let range = run(&[
        "simulate", "--d", "0:1:0.5", "--n", "36", "--trials", "16", "--seed", "3",
    ]);
    let list = run(&[
        "simulate", "--d", "0,0.5,1", "--n", "36", "--trials", "16", "--seed", "3",
    ]);
    assert!(range.status.success());
    assert_eq!(range.stdout, list.stdout);

    let doc = stdout_json(&range);
    let ds: Vec<f64> = doc["results"]
        .as_array()
        .unwrap()
        .iter()
        .map(|row| row["d"].as_f64().unwrap())
        .collect();
    assert_eq!(ds, vec![0.0, 0.5, 1.0]);
    assert_eq!(doc["seed"], 3);
    assert!(doc["results"][0].get("workers").is_none());
}

#[test]
fn simulate_seed_comes_from_environment_when_flag_is_absent() {
    let out = Command::new(bin())
        .args(["simulate", "--d", "0.5", "--n", "36", "--trials", "8"])
        .env("MH_METRICS_SEED", "5")
        .output()
        .unwrap();
    let doc = stdout_json(&out);
    assert_eq!(doc["seed"], 5);

    let out = Command::new(bin())
        .args(["simulate", "--d", "0.5", "--n", "36", "--trials", "8"])
        .env("MH_METRICS_SEED", "not-a-number")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_rejects_bad_grids() {
    let out = run(&["simulate", "--d", "0:1:-0.5", "--n", "36", "--trials", "4"]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["simulate", "--d", "0.5", "--n", "0", "--trials", "4"]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&[
        "simulate", "--d", "0.5", "--n", "36", "--trials", "4", "--cutoffs", "1,1",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn truevalue_prints_one_scalar() {
    let out = run(&["truevalue", "--d", "0"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout), "0.0000000000\n");

    let out = run(&["truevalue", "--d", "1"]);
    let text = String::from_utf8_lossy(&out.stdout);
    let value: f64 = text.trim().parse().unwrap();
    assert!((value - 0.5512).abs() < 1e-3);
}
