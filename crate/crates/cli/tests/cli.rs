use std::fs;
use std::path::Path;
use std::process::Command;

use cmv_krylov::{VerblunskySequence, C64};
use cmv_krylov_cli::formats::{
    read_csv, read_json, read_matrix, write_json, write_matrix, Manifest,
};
use nalgebra::DMatrix;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cmv-krylov"))
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = bin().args(args).output().expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn write(path: &Path, text: &str) {
    fs::write(path, text).unwrap();
}

#[test]
fn sequence_json_uses_pairs_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let seq = VerblunskySequence::new(vec![
        C64::new(0.25, -0.5),
        C64::new(0.0, 0.1),
        C64::new(0.6, 0.8),
    ])
    .unwrap();
    let path = dir.path().join("seq.json");
    write_json(&path, &seq).unwrap();
    let raw: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(raw["alphas"][0], serde_json::json!([0.25, -0.5]));
    let back: VerblunskySequence = read_json(&path).unwrap();
    assert_eq!(back, seq);
}

#[test]
fn corrupted_alpha_fails_to_load() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    write(&path, r#"{"alphas": [[0.1, 0.0], [1.5, 0.0]]}"#);
    let err = read_json::<VerblunskySequence>(&path).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(
        err.to_string().contains("unit disk") || err.to_string().contains("1.5"),
        "{err}"
    );
}

#[test]
fn binary_matrix_cache_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let m = DMatrix::from_fn(3, 5, |r, c| C64::new(r as f64 - 0.5, 1e-300 * c as f64));
    let path = dir.path().join("m.bin");
    write_matrix(&path, &m).unwrap();
    assert_eq!(read_matrix(&path).unwrap(), m);
    assert_eq!(fs::metadata(&path).unwrap().len(), 28 + 15 * 16);
}

#[test]
fn minimal_ensemble_run_writes_schema_valid_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    write(
        &cfg,
        r#"
        [ensemble]
        sizes = [60, 100]
        realizations = 3
        series_dim = 100
        series_steps = 50
        "#,
    );
    let out = dir.path().join("out");
    let (code, _, err) = run(&[
        "ensemble-scan",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let (header, rows) = read_csv(&out.join("ensemble.csv")).unwrap();
    assert_eq!(
        header,
        [
            "d",
            "ensemble",
            "param",
            "mean_r",
            "mean_K",
            "mean_expS",
            "stderr",
            "realizations",
            "manifest"
        ]
    );
    assert_eq!(rows.len(), 6);
    for r in &rows {
        assert_eq!(r.len(), header.len());
        assert!(r[3].parse::<f64>().unwrap() > 0.0);
        assert_eq!(r[8], "manifest.json");
    }
    let manifest: Manifest = read_json(&out.join("manifest.json")).unwrap();
    assert_eq!(manifest.seed, 5);
    assert_eq!(manifest.experiment, "ensemble-scan");
    for f in &manifest.outputs {
        assert!(out.join(f).exists(), "{f}");
    }
    let (header, series) = read_csv(&out.join("series-chaotic-beta2.csv")).unwrap();
    assert_eq!(header, ["t", "K", "expS", "manifest"]);
    assert_eq!(series.len(), 51);
}

#[test]
fn identical_seed_gives_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    write(
        &cfg,
        "[ensemble]\nsizes = [80]\nrealizations = 4\nseries_dim = 0\n",
    );
    let mut tables = Vec::new();
    for (name, threads) in [("a", "1"), ("b", "3")] {
        let out = dir.path().join(name);
        let (code, _, err) = run(&[
            "ensemble-scan",
            "--config",
            cfg.to_str().unwrap(),
            "--seed",
            "11",
            "--threads",
            threads,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "{err}");
        tables.push(fs::read(out.join("ensemble.csv")).unwrap());
    }
    assert_eq!(tables[0], tables[1]);
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    write(&cfg, "[ensemble]\nsizes = [100]\nrealisations = 3\n");
    let (code, _, err) = run(&[
        "ensemble-scan",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, 2);
    assert!(err.contains("realisations"), "{err}");

    let (code, _, _) = run(&[
        "verify",
        "--config",
        dir.path().join("missing.toml").to_str().unwrap(),
    ]);
    assert_eq!(code, 2);

    let (code, _, _) = run(&["ensemble-scan", "--tol", "-1"]);
    assert_eq!(code, 2);

    let (code, _, _) = run(&["no-such-command"]);
    assert_eq!(code, 2);
}

#[test]
fn identity_seed_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("dual.toml");
    write(
        &cfg,
        "[dual_unitary]\nsites = [4]\nseed_operator = \"identity\"\n",
    );
    let (code, _, err) = run(&[
        "dual-unitary",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, 2);
    assert!(err.contains("identity"), "{err}");
}

#[test]
fn dual_unitary_small_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("dual.toml");
    write(
        &cfg,
        "[dual_unitary]\nsites = [4]\nfields = [1.27]\nmax_dim = 120\n",
    );
    let out = dir.path().join("out");
    let (code, stdout, err) = run(&[
        "dual-unitary",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(stdout.contains("L=4 first nonzero Some(3)"), "{stdout}");
    let (_, rows) = read_csv(&out.join("alphas-L4.csv")).unwrap();
    for r in &rows[..3] {
        assert!(r[3].parse::<f64>().unwrap() < 1e-16);
    }
}

#[test]
fn circuit_emit_then_check() {
    let dir = tempfile::tempdir().unwrap();
    let seq = VerblunskySequence::new(vec![
        C64::new(0.3, 0.2),
        C64::new(-0.1, 0.5),
        C64::new(0.0, -0.4),
        C64::new(0.2, 0.1),
        C64::from_polar(1.0, 0.7),
    ])
    .unwrap();
    let alphas = dir.path().join("seq.json");
    write_json(&alphas, &seq).unwrap();
    let out = dir.path().join("out");
    let (code, stdout, err) = run(&[
        "circuit",
        "emit",
        "--alphas",
        alphas.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(stdout.starts_with("3 qubits"), "{stdout}");
    for f in [
        "gates.json",
        "gates.txt",
        "counts.json",
        "unitary.json",
        "gates-demultiplexed.json",
        "manifest.json",
    ] {
        assert!(out.join(f).exists(), "{f}");
    }
    let gates = out.join("gates.json");
    let (code, _, err) = run(&[
        "circuit",
        "check",
        "--gates",
        gates.to_str().unwrap(),
        "--alphas",
        alphas.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let flat = out.join("gates-demultiplexed.json");
    let (code, _, err) = run(&[
        "circuit",
        "check",
        "--gates",
        flat.to_str().unwrap(),
        "--alphas",
        alphas.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");

    // a different sequence is caught as a numerical failure
    let other = dir.path().join("other.json");
    write_json(
        &other,
        &VerblunskySequence::new(vec![C64::new(0.5, 0.0), C64::new(1.0, 0.0)]).unwrap(),
    )
    .unwrap();
    let (code, _, _) = run(&[
        "circuit",
        "check",
        "--gates",
        gates.to_str().unwrap(),
        "--alphas",
        other.to_str().unwrap(),
    ]);
    assert_eq!(code, 3);
}

#[test]
fn circuit_emit_rejects_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    write(&bad, r#"{"alphas": [[1.5, 0.0]]}"#);
    let (code, _, _) = run(&[
        "circuit",
        "emit",
        "--alphas",
        bad.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, 2);
    let ok = dir.path().join("ok.json");
    write(&ok, r#"{"alphas": [[0.1, 0.0], [0.2, 0.0], [1.0, 0.0]]}"#);
    let (code, _, err) = run(&[
        "circuit",
        "emit",
        "--alphas",
        ok.to_str().unwrap(),
        "--qubits",
        "1",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, 2, "{err}");
}

#[test]
fn verify_rejects_corrupted_sequence_in_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("verify.toml");
    write(
        &cfg,
        "[verify]\nsequences = [{ alphas = [[0.2, 0.0], [1.5, 0.0]] }]\n",
    );
    let (code, _, err) = run(&[
        "verify",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, 2);
    assert!(err.contains("unit disk") || err.contains("1.5"), "{err}");
}

#[test]
fn verify_suite_passes_and_lists_deviations() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("verify.toml");
    write(
        &cfg,
        "[verify]\nsequences = [{ alphas = [[0.2, 0.1], [0.0, -0.3], [0.0, 1.0]] }]\n",
    );
    let out = dir.path().join("out");
    let (code, stdout, err) = run(&[
        "verify",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{stdout}{err}");
    let report: serde_json::Value = read_json(&out.join("report.json")).unwrap();
    let checks = report["checks"].as_array().unwrap();
    assert!(checks.len() > 50);
    for c in checks {
        assert!(c["deviation"].is_number(), "{c}");
        assert!(c["threshold"].is_number());
        assert_eq!(c["passed"], true);
    }
    assert!(checks
        .iter()
        .any(|c| c["parameters"]["sequence"] == "input-0"));

    // an impossible tolerance turns the suite into a numerical failure
    let (code, _, _) = run(&["verify", "--tol", "1e-300", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 3);
}
