use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn wassflow(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wassflow"))
        .args(args)
        .env("WASSFLOW_OUT", out)
        .output()
        .expect("binary runs")
}

fn verdicts(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("verdicts.json")).unwrap()).unwrap()
}

#[test]
fn stationary_run_passes_and_stays_at_rest() {
    let tmp = tempfile::tempdir().unwrap();
    let out = wassflow(&["run", scenario("stationary.json").to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let dir = tmp.path().join("stationary");
    let trace = std::fs::read_to_string(dir.join("trace.csv")).unwrap();
    for line in trace.lines().skip(1) {
        let h: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
        assert!(h < 1e-8, "{line}");
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["exit_code"], 0);
    assert_eq!(manifest["scenario_hash"], verdicts(&dir)["scenario_hash"]);
}

#[test]
fn source_solution_run_meets_its_error_bound() {
    let tmp = tempfile::tempdir().unwrap();
    let out = wassflow(&["run", scenario("barenblatt_m2.json").to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(0));
    let err = verdicts(&tmp.path().join("barenblatt_m2"))["metrics"]["final_l1_error"]
        .as_f64()
        .unwrap();
    assert!(err <= 3e-2, "{err}");
}

#[test]
fn malformed_and_invalid_files_exit_with_schema_code() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.json");
    std::fs::write(&bad, "{\n  \"name\": \"x\",\n").unwrap();
    let out = wassflow(&["run", bad.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));

    std::fs::write(
        &bad,
        r#"{"name": "x", "task": "flow", "m": 1, "domain": {"a": 0, "b": 1, "cells": 8}}"#,
    )
    .unwrap();
    assert_eq!(
        wassflow(&["run", bad.to_str().unwrap()], tmp.path()).status.code(),
        Some(2)
    );

    let missing = tmp.path().join("missing.json");
    assert_eq!(
        wassflow(&["run", missing.to_str().unwrap()], tmp.path()).status.code(),
        Some(2)
    );
}

#[test]
fn failing_check_exits_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    let out = wassflow(&["run", scenario("double_well.json").to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn strict_mode_halves_recorded_tolerances() {
    let tmp = tempfile::tempdir().unwrap();
    let file = scenario("compare_quadratic.json");
    let file = file.to_str().unwrap();
    let loose = tmp.path().join("loose");
    let strict = tmp.path().join("strict");
    assert_eq!(
        wassflow(&["run", file, "--out", loose.to_str().unwrap()], tmp.path())
            .status
            .code(),
        Some(0)
    );
    assert_eq!(
        wassflow(
            &["--strict", "run", file, "--out", strict.to_str().unwrap()],
            tmp.path()
        )
        .status
        .code(),
        Some(0)
    );
    let tol = |dir: &Path| {
        verdicts(&dir.join("compare_quadratic"))["verdicts"][0]["tolerances"]["abs"]
            .as_f64()
            .unwrap()
    };
    assert_eq!(tol(&loose), 5e-2);
    assert_eq!(tol(&strict), 2.5e-2);
}

#[test]
fn identical_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let file = scenario("flow_relaxation.json");
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for (dir, threads) in [(&a, "1"), (&b, "3")] {
        let out = wassflow(
            &[
                "run",
                file.to_str().unwrap(),
                "--out",
                dir.to_str().unwrap(),
                "--threads",
                threads,
            ],
            tmp.path(),
        );
        assert_eq!(out.status.code(), Some(0));
    }
    for name in ["manifest.json", "verdicts.json", "trace.csv", "final_density.csv"] {
        let x = std::fs::read(a.join("flow_relaxation").join(name)).unwrap();
        let y = std::fs::read(b.join("flow_relaxation").join(name)).unwrap();
        assert!(x == y, "{name} differs");
    }
}

#[test]
fn curvature_sweep_shows_decreasing_concentration() {
    let tmp = tempfile::tempdir().unwrap();
    let out = wassflow(
        &[
            "sweep",
            scenario("k_sweep.json").to_str().unwrap(),
            "--param",
            "K",
            "--values",
            "1,4,16,64",
        ],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(tmp.path().join("k_sweep").join("sweep-K.csv")).unwrap();
    let header: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "alpha@1").unwrap();
    let alpha: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(col).unwrap().parse().unwrap())
        .collect();
    assert_eq!(alpha.len(), 4);
    assert!(alpha.windows(2).all(|w| w[1] < w[0]), "{alpha:?}");
}

#[test]
fn exponent_sweep_keeps_scheme_gaps_small() {
    let tmp = tempfile::tempdir().unwrap();
    let out = wassflow(
        &[
            "sweep",
            scenario("compare_quadratic.json").to_str().unwrap(),
            "--param",
            "m",
            "--values",
            "0.75,0.9,1.1,1.5",
        ],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn empty_sweep_is_a_schema_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = wassflow(
        &["sweep", scenario("k_sweep.json").to_str().unwrap(), "--param", "K"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn every_bundled_scenario_parses() {
    for entry in std::fs::read_dir(Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios")).unwrap() {
        let path = entry.unwrap().path();
        let text = std::fs::read_to_string(&path).unwrap();
        wassflow::scenario::Scenario::from_json(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    }
}
