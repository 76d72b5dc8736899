use std::path::Path;
use std::process::Command;

use optomech_sweep::{emit, run_sweep, Format, SweepConfig};

const DETUNING_SWEEP: &str = include_str!("../../../configs/detuning_sweep.json");

fn small_config(edit: &[(&str, &str)]) -> String {
    let mut text = DETUNING_SWEEP.replace("\"n_points\": 96", "\"n_points\": 6");
    for (from, to) in edit {
        assert!(text.contains(from), "{from}");
        text = text.replace(from, to);
    }
    text
}

fn simulate(config: &str, dir: &Path, extra: &[&str]) -> (i32, String) {
    let cfg = dir.join("config.json");
    std::fs::write(&cfg, config).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_optomech"))
        .arg("simulate")
        .arg("--config")
        .arg(&cfg)
        .arg("--out-dir")
        .arg(dir.join("out"))
        .args(extra)
        .output()
        .unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn column(header: &[String], name: &str) -> usize {
    header
        .iter()
        .position(|h| h == name)
        .unwrap_or_else(|| panic!("no column {name}"))
}

#[test]
fn successful_run_writes_all_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let (code, err) = simulate(&small_config(&[]), dir.path(), &["--threads", "2"]);
    assert_eq!(code, 0, "{err}");
    let out = dir.path().join("out");
    for f in ["records.csv", "records.jsonl", "manifest.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let (header, rows) = read_csv(&out.join("records.csv"));
    assert_eq!(rows.len(), 6);
    let reason = column(&header, "reason");
    assert!(rows.iter().all(|r| r[reason] == "ok"));
    let jsonl = std::fs::read_to_string(out.join("records.jsonl")).unwrap();
    assert_eq!(jsonl.lines().count(), 6);
    let first: serde_json::Value = serde_json::from_str(jsonl.lines().next().unwrap()).unwrap();
    assert_eq!(first["reason"], "ok");
    assert!(first["EN_mirror_mirror"].is_number());

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["points"], 6);
    assert_eq!(manifest["config_sha256"].as_str().unwrap().len(), 64);
    assert_eq!(manifest["conventions_sha256"].as_str().unwrap().len(), 64);
    assert_eq!(manifest["tool_version"], env!("CARGO_PKG_VERSION"));
    // Defaults are written out.
    assert_eq!(
        manifest["resolved_config"]["tolerances"]["lyapunov_rel_tol"],
        1e-10
    );
    assert_eq!(manifest["resolved_config"]["branch_policy"], "physical");
}

#[test]
fn config_errors_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let (code, err) = simulate(
        &small_config(&[("\"n_points\": 6", "\"n_points\": 1")]),
        dir.path(),
        &[],
    );
    assert_eq!(code, 2);
    assert!(err.contains("axes[0].n_points"), "{err}");
    let (code, _) = simulate("{ not json", dir.path(), &[]);
    assert_eq!(code, 2);
    assert!(!dir.path().join("out").join("records.csv").exists());
}

#[test]
fn failing_points_exit_with_code_three_and_still_flush() {
    let dir = tempfile::tempdir().unwrap();
    let text = small_config(&[(
        "\"parameter\": \"detuning_over_omega_m\", \"min\": 0.1, \"max\": 2.0",
        "\"parameter\": \"lambda_over_omega_m\", \"min\": 0.0, \"max\": 1.5",
    )]);
    let (code, err) = simulate(&text, dir.path(), &["--format", "csv"]);
    assert_eq!(code, 3, "{err}");
    let (header, rows) = read_csv(&dir.path().join("out/records.csv"));
    assert_eq!(rows.len(), 6);
    let reason = column(&header, "reason");
    assert_eq!(rows[0][reason], "ok");
    assert_eq!(rows[5][reason], "invalid_parameters");
    assert_eq!(rows[5][column(&header, "EN_mirror_mirror")], "");
    assert!(!dir.path().join("out/records.jsonl").exists());
}

#[test]
fn unstable_points_have_empty_measure_cells() {
    let dir = tempfile::tempdir().unwrap();
    let text = small_config(&[
        ("\"min\": 0.1, \"max\": 2.0", "\"min\": -1.5, \"max\": -0.5"),
        ("\"drive_power\": 50e-3", "\"drive_power\": 1.0"),
        ("\"cavity_length\": 25e-3", "\"cavity_length\": 1e-3"),
    ]);
    let (code, err) = simulate(&text, dir.path(), &[]);
    assert_eq!(code, 0, "{err}");
    let (header, rows) = read_csv(&dir.path().join("out/records.csv"));
    let reason = column(&header, "reason");
    let unstable: Vec<_> = rows.iter().filter(|r| r[reason] == "unstable").collect();
    assert!(!unstable.is_empty());
    for r in unstable {
        for c in [
            "EN_mirror_mirror",
            "EN_beam_beam",
            "duan_mirror_mirror",
            "S_out",
            "lyapunov_residual",
        ] {
            assert_eq!(r[column(&header, c)], "", "{c}");
        }
        assert_eq!(r[column(&header, "stable_eigen")], "false");
    }
    let jsonl = std::fs::read_to_string(dir.path().join("out/records.jsonl")).unwrap();
    for line in jsonl.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        if v["reason"] == "unstable" {
            assert!(v["EN_mirror_mirror"].is_null());
        }
    }
}

#[test]
fn thread_count_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("config.json");
    std::fs::write(&cfg, small_config(&[])).unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_optomech"))
        .args(["simulate", "--format", "csv", "--config"])
        .arg(&cfg)
        .arg("--out-dir")
        .arg(dir.path().join("out"))
        .env(optomech_sweep::THREADS_ENV, "1")
        .status()
        .unwrap();
    assert!(status.success());
}

#[test]
fn single_record_gives_two_line_csv() {
    let cfg = SweepConfig::from_json(&small_config(&[])).unwrap();
    let recs = run_sweep(&cfg, false);
    let dir = tempfile::tempdir().unwrap();
    emit(dir.path(), &cfg, b"", &recs[..1], Format::Csv, false).unwrap();
    let text = std::fs::read_to_string(dir.path().join("records.csv")).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(emit(dir.path(), &cfg, b"", &[], Format::Csv, false).is_err());
}

#[test]
fn undriven_sweep_is_separable_and_stable() {
    let text = small_config(&[(
        "\"parameter\": \"detuning_over_omega_m\", \"min\": 0.1, \"max\": 2.0, \"n_points\": 6",
        "\"parameter\": \"drive_power\", \"min\": 0.0, \"max\": 0.0, \"n_points\": 2",
    )]);
    let cfg = SweepConfig::from_json(&text).unwrap();
    for r in run_sweep(&cfg, false) {
        assert!(r.stability.unwrap().stable_eigen);
        assert_eq!(r.measures.en_mirror_mirror, Some(0.0));
        assert!(r.measures.en_beam_beam.unwrap() < 1e-12);
    }
}

#[test]
fn two_axis_grid_has_row_major_records() {
    let text = small_config(&[(
        "\"n_points\": 6, \"scale\": \"linear\" }",
        "\"n_points\": 20, \"scale\": \"linear\" }, { \"parameter\": \"lambda_over_omega_m\", \"min\": 0.0, \"max\": 0.9, \"n_points\": 20 }",
    )]);
    let cfg = SweepConfig::from_json(&text).unwrap();
    let recs = run_sweep(&cfg, false);
    assert_eq!(recs.len(), 400);
    for (i, r) in recs.iter().enumerate() {
        assert_eq!(r.index, i);
    }
    for w in recs.windows(2) {
        let (a, b) = (&w[0].axis_values, &w[1].axis_values);
        assert!(a[0] < b[0] || (a[0] == b[0] && a[1] < b[1]));
    }
}

#[test]
fn matrices_are_exported_with_sixteen_digits() {
    let dir = tempfile::tempdir().unwrap();
    let (code, err) = simulate(
        &small_config(&[]),
        dir.path(),
        &["--export-matrices", "--format", "jsonl"],
    );
    assert_eq!(code, 0, "{err}");
    let m = dir.path().join("out/matrices");
    for kind in ["drift", "diffusion", "covariance"] {
        let text = std::fs::read_to_string(m.join(format!("point_00000_{kind}.csv"))).unwrap();
        assert_eq!(text.lines().count(), 8);
        let first = text.lines().next().unwrap().split(',').next().unwrap();
        let mantissa = first.trim_start_matches('-').split('e').next().unwrap();
        assert_eq!(mantissa.len(), 17, "{first}");
    }
}

#[test]
fn spectrum_output_has_one_row_per_frequency() {
    let dir = tempfile::tempdir().unwrap();
    let text = include_str!("../../../configs/output_spectrum.json");
    let (code, err) = simulate(text, dir.path(), &["--format", "csv"]);
    assert_eq!(code, 0, "{err}");
    let (header, rows) = read_csv(&dir.path().join("out/spectrum.csv"));
    assert_eq!(rows.len(), 3 * 601);
    let s = column(&header, "S_out");
    assert!(rows.iter().all(|r| r[s].parse::<f64>().unwrap() > 0.0));
}
