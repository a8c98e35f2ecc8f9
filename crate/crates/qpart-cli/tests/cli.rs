//! End-to-end tests of the `qpart` binary: exit codes, witness quality, and
//! byte-level determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::tempdir;

use qpart_cli::io::{load_valuation, parse_rat, save_valuation};
use qpart_core::classify::{FractionalCover, Partition};
use qpart_core::setfn::{gen_binomial_floor, gen_threshold};
use qpart_core::{rat, Rat};

fn qpart(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qpart"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout is utf8")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("stderr is utf8")
}

fn code_of(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn file(dir: &Path, name: &str, content: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, content).expect("write test file");
    path
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf8 path")
}

const THRESHOLD_43: &str = r#"{"generator": {"kind": "threshold", "m": 4, "top": "4/3"}}"#;

#[test]
fn save_load_round_trip_is_identity() {
    let dir = tempdir().unwrap();
    let v = gen_threshold(5, &rat(355, 113).min(rat(2, 1))).unwrap();
    let path = dir.path().join("v.json");
    save_valuation(&v, &path).unwrap();
    assert_eq!(load_valuation(&path).unwrap(), v);

    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.contains("\"values\""));
    let reload = file(dir.path(), "copy.json", &text);
    assert_eq!(load_valuation(&reload).unwrap(), v);
}

#[test]
fn generator_file_expands_to_the_generated_table() {
    let dir = tempdir().unwrap();
    let path = file(dir.path(), "v.json", THRESHOLD_43);
    let expected = gen_threshold(4, &rat(4, 3)).unwrap();
    assert_eq!(load_valuation(&path).unwrap(), expected);
}

#[test]
fn malformed_rational_names_the_entry_and_exits_two() {
    let dir = tempdir().unwrap();
    let path = file(
        dir.path(),
        "v.json",
        r#"{"m": 2, "values": ["0", "1", "1", "1/0"]}"#,
    );
    let out = qpart(&["classify", "--in", path_str(&path), "--level"]);
    assert_eq!(code_of(&out), 2);
    let err = stderr_of(&out);
    assert!(err.contains("values[3]"), "stderr was: {err}");
    assert!(err.contains("denominator is zero"), "stderr was: {err}");
}

#[test]
fn classify_level_prints_a_bare_integer() {
    let dir = tempdir().unwrap();
    let path = file(dir.path(), "v.json", THRESHOLD_43);
    let out = qpart(&["classify", "--in", path_str(&path), "--level"]);
    assert_eq!(code_of(&out), 0);
    assert_eq!(stdout_of(&out).trim(), "4");
}

#[test]
fn classify_witness_reverifies_against_the_library() {
    let dir = tempdir().unwrap();
    let path = file(
        dir.path(),
        "v.json",
        r#"{"generator": {"kind": "threshold", "m": 4, "top": "2"}}"#,
    );
    let out = qpart(&[
        "classify", "--in", path_str(&path), "--q", "3", "--format", "json",
    ]);
    assert_eq!(code_of(&out), 0);
    let report: Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(report["member"], Value::Bool(false));

    let v = gen_threshold(4, &rat(2, 1)).unwrap();
    let witness = &report["witness"];
    let blocks: Vec<u32> = witness["blocks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|b| b.as_u64().unwrap() as u32)
        .collect();
    let part = Partition::new(blocks).unwrap();
    let weights: Vec<(u32, Rat)> = witness["cover"]
        .as_array()
        .unwrap()
        .iter()
        .map(|pair| {
            let t = pair[0].as_u64().unwrap() as u32;
            let w = parse_rat(pair[1].as_str().unwrap(), "w").unwrap();
            (t, w)
        })
        .collect();
    let cover = FractionalCover { weights };
    let lhs = parse_rat(witness["lhs"].as_str().unwrap(), "lhs").unwrap();
    let rhs = parse_rat(witness["rhs"].as_str().unwrap(), "rhs").unwrap();
    let subset = witness["subset"].as_u64().unwrap() as u32;

    assert!(cover.covers(part.k()));
    assert_eq!(cover.value(&v, &part), lhs);
    assert_eq!(v.value(subset), &rhs);
    assert!(lhs < rhs);
}

#[test]
fn mph_witness_matches_the_classifier() {
    let dir = tempdir().unwrap();
    let path = file(
        dir.path(),
        "v.json",
        r#"{"generator": {"kind": "binomial_floor", "m": 4, "k": 2}}"#,
    );
    let good = qpart(&["mph", "--in", path_str(&path), "--q", "2"]);
    assert_eq!(code_of(&good), 0);
    let report: Value = serde_json::from_str(&stdout_of(&good)).unwrap();
    assert_eq!(report["verified"], Value::Bool(true));
    assert_eq!(report["k"].as_u64().unwrap(), 2);

    let bad = qpart(&["mph", "--in", path_str(&path), "--q", "3"]);
    assert_eq!(code_of(&bad), 1);
    let report: Value = serde_json::from_str(&stdout_of(&bad)).unwrap();
    let witness = &report["witness"];
    let covered = parse_rat(witness["covered"].as_str().unwrap(), "covered").unwrap();
    let target = parse_rat(witness["target"].as_str().unwrap(), "target").unwrap();
    assert!(covered < target);
    let v = gen_binomial_floor(4, 2).unwrap();
    let subset = witness["subset"].as_u64().unwrap() as u32;
    assert_eq!(v.value(subset), &target);
}

#[test]
fn verify_smoothness_example_passes() {
    let out = qpart(&["verify", "--suite", "smoothness", "--m", "5", "--q", "4"]);
    assert_eq!(code_of(&out), 0);
    let report: Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(report["passed"], Value::Bool(true));
    assert_eq!(report["suite"], "smoothness");
    assert!(report["checks"].as_u64().unwrap() >= 3);
}

#[test]
fn tails_csv_is_identical_across_threads_and_reruns() {
    let dir = tempdir().unwrap();
    let path = file(dir.path(), "v.json", THRESHOLD_43);
    let base = [
        "tails", "--in", path_str(&path), "--q", "4", "--n", "8192", "--seed", "11",
    ];
    let lone = qpart(&base);
    assert_eq!(code_of(&lone), 0);
    let text = stdout_of(&lone);
    assert!(text.starts_with("x,empirical_survival,bound_qpart,bound_schechtman\n"));

    let mut flagged = base.to_vec();
    flagged.extend(["--threads", "3"]);
    assert_eq!(stdout_of(&qpart(&flagged)), text);

    let env_run = Command::new(env!("CARGO_BIN_EXE_qpart"))
        .args(base)
        .env("QPART_THREADS", "3")
        .output()
        .expect("binary runs");
    assert_eq!(stdout_of(&env_run), text);

    assert_eq!(stdout_of(&qpart(&base)), text);
}

#[test]
fn tails_out_file_matches_stdout() {
    let dir = tempdir().unwrap();
    let path = file(dir.path(), "v.json", THRESHOLD_43);
    let csv = dir.path().join("curve.csv");
    let piped = qpart(&[
        "tails", "--in", path_str(&path), "--q", "4", "--n", "4096", "--seed", "7",
    ]);
    let written = qpart(&[
        "tails", "--in", path_str(&path), "--q", "4", "--n", "4096", "--seed", "7",
        "--out", path_str(&csv),
    ]);
    assert_eq!(code_of(&written), 0);
    assert!(stdout_of(&written).is_empty());
    assert_eq!(std::fs::read_to_string(&csv).unwrap(), stdout_of(&piped));
}

#[test]
fn roots_agree_with_closed_forms() {
    let out = qpart(&["roots", "--alpha", "1", "--q", "2", "--s", "1"]);
    assert_eq!(code_of(&out), 0);
    let report: Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert!((report["value"].as_f64().unwrap() - 2.0).abs() < 1e-9);
    assert!(report["residual"].as_f64().unwrap() < 1e-9);

    let tau = qpart(&["roots", "--kind", "tau"]);
    let report: Value = serde_json::from_str(&stdout_of(&tau)).unwrap();
    assert!(report["residual"].as_f64().unwrap() < 1e-10);

    let tmin = qpart(&[
        "roots", "--alpha", "0.1", "--q", "5", "--s", "2", "--tmin",
    ]);
    let report: Value = serde_json::from_str(&stdout_of(&tmin)).unwrap();
    assert_eq!(report["kind"], "tmin");
    assert!((report["value"].as_f64().unwrap() - 1.38).abs() < 0.01);
}

#[test]
fn minimax_rejects_a_cap_above_the_step_threshold() {
    let dir = tempdir().unwrap();
    let path = file(dir.path(), "v.json", THRESHOLD_43);
    let good = qpart(&["minimax", "--in", path_str(&path), "--p", "1/16", "--q", "4"]);
    assert_eq!(code_of(&good), 0);
    let report: Value = serde_json::from_str(&stdout_of(&good)).unwrap();
    assert_eq!(report["step_holds"], Value::Bool(true));
    assert_eq!(report["telescope_holds"], Value::Bool(true));

    let bad = qpart(&["minimax", "--in", path_str(&path), "--p", "1/8", "--q", "4"]);
    assert_eq!(code_of(&bad), 2);
    assert!(stderr_of(&bad).contains("p:"), "stderr: {}", stderr_of(&bad));
}

#[test]
fn simulate_accounting_identity_holds_exactly() {
    let dir = tempdir().unwrap();
    let buyer = file(
        dir.path(),
        "buyer.json",
        r#"{"generator": {"kind": "xos", "m": 2, "clauses": [["3", "0"]]}}"#,
    );
    let market = file(
        dir.path(),
        "market.json",
        &format!(
            r#"{{"buyers": [{:?}, {{"generator": {{"kind": "xos", "m": 2, "clauses": [["2", "2"]]}}}}], "prices": ["1", "1"]}}"#,
            buyer.file_name().unwrap().to_str().unwrap()
        ),
    );
    let out = qpart(&[
        "simulate", "--market", path_str(&market), "--opt", "--worst-order",
    ]);
    assert_eq!(code_of(&out), 0);
    let report: Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    let grab = |key: &str| parse_rat(report[key].as_str().unwrap(), key).unwrap();
    let utilities: Rat = report["utilities"]
        .as_array()
        .unwrap()
        .iter()
        .map(|u| parse_rat(u.as_str().unwrap(), "u").unwrap())
        .sum();
    assert_eq!(grab("welfare"), grab("revenue") + utilities);
    assert!(grab("worst_welfare") <= grab("welfare"));
    assert!(grab("welfare") <= grab("opt_welfare"));
    assert_eq!(report["worst_order"].as_array().unwrap().len(), 2);
}

#[test]
fn iso_reports_a_holding_inequality() {
    let dir = tempdir().unwrap();
    let space = file(dir.path(), "sp.json", r#"{"uniform_bits": 3}"#);
    let sets = file(
        dir.path(),
        "sets.json",
        r#"{"sets": [[[0,0,0],[1,1,0]], [[0,1,1]]]}"#,
    );
    let out = qpart(&[
        "iso", "--space", path_str(&space), "--sets", path_str(&sets),
        "--alpha", "1.0", "--s", "1",
    ]);
    assert_eq!(code_of(&out), 0);
    let report: Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(report["holds"], Value::Bool(true));
    assert!(report["lhs"].as_f64().unwrap() <= report["rhs"].as_f64().unwrap());

    let empty = file(dir.path(), "bad.json", r#"{"sets": [[], [[0,0,0]]]}"#);
    let bad = qpart(&[
        "iso", "--space", path_str(&space), "--sets", path_str(&empty),
        "--alpha", "1.0", "--s", "1",
    ]);
    assert_eq!(code_of(&bad), 2);
    assert!(stderr_of(&bad).contains("sets"), "stderr: {}", stderr_of(&bad));
}

#[test]
fn prices_gamma_mode_requires_the_gamma_flag() {
    let dir = tempdir().unwrap();
    let path = file(dir.path(), "v.json", THRESHOLD_43);
    let out = qpart(&[
        "prices", "--in", path_str(&path), "--blocks", "3,12", "--mode", "gamma",
    ]);
    assert_eq!(code_of(&out), 2);
    assert!(stderr_of(&out).contains("gamma"), "stderr: {}", stderr_of(&out));

    let ok = qpart(&[
        "prices", "--in", path_str(&path), "--blocks", "3,12", "--mode", "gamma",
        "--gamma", "1/2",
    ]);
    assert_eq!(code_of(&ok), 0);
    let report: Value = serde_json::from_str(&stdout_of(&ok)).unwrap();
    assert_eq!(report["feasible"], Value::Bool(true));
    assert!(report["violation"].is_null());
}

#[test]
fn verify_reports_are_deterministic() {
    let args = [
        "verify", "--suite", "duality", "--m", "4", "--q", "3", "--trials", "10",
        "--seed", "7",
    ];
    let first = qpart(&args);
    assert_eq!(code_of(&first), 0);
    assert_eq!(stdout_of(&qpart(&args)), stdout_of(&first));
}

#[test]
fn unknown_flags_exit_two() {
    let out = qpart(&["classify", "--nonsense"]);
    assert_eq!(code_of(&out), 2);
}
