//! End-to-end tests of the command-line surface: output files, determinism,
//! overwrite protection, and process exit codes.

use std::path::Path;
use std::process::Command;

use ooksim_cli::{cmd_psd, cmd_sweep, parse_config, CliError, PhaseSelection};

fn tiny_sets() -> Vec<String> {
    [
        "info_length=100",
        "snr.grid_db=[2.0, 4.0]",
        "stop.max_trials=5",
        "stop.min_bit_errors=1000000",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect()
}

fn read_rows(path: &Path) -> Vec<String> {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines().map(|l| l.to_string()).collect()
}

/// Drops the trailing wall-time column, which is the only nondeterministic
/// field of a data row.
fn stats_columns(row: &str) -> String {
    let cols: Vec<&str> = row.split(',').collect();
    cols[..cols.len() - 1].join(",")
}

#[test]
fn sweep_writes_expected_files_and_rows() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = parse_config(None, &tiny_sets(), None, None, dir.path(), 1, false).unwrap();
    cmd_sweep(&manifest).unwrap();

    let rows = read_rows(&dir.path().join("exact.csv"));
    assert_eq!(
        rows[0],
        "snr_db,trials,info_bits,bit_errors,ber,ber_ci95,block_errors,bler,wall_time_s"
    );
    assert_eq!(rows.len(), 3, "header plus one row per SNR point");
    assert!(rows[1].starts_with("2,5,500,"));
    assert!(rows[2].starts_with("4,5,500,"));

    let sidecar: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("exact.json")).unwrap())
            .unwrap();
    assert_eq!(sidecar["label"], "exact");
    assert_eq!(sidecar["config"]["info_length"], 100);
    assert_eq!(sidecar["config"]["code"], "15,13");
    assert_eq!(sidecar["config_hash"], manifest.config_hash);
    assert!(sidecar["rng_algorithm"].as_str().unwrap().contains("chacha12"));
}

#[test]
fn single_trial_grid_produces_exactly_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let sets: Vec<String> = [
        "info_length=100",
        "snr.grid_db=[3.0]",
        "stop.max_trials=1",
        "stop.min_bit_errors=1000000",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let manifest = parse_config(None, &sets, None, None, dir.path(), 1, false).unwrap();
    cmd_sweep(&manifest).unwrap();
    let rows = read_rows(&dir.path().join("exact.csv"));
    assert_eq!(rows.len(), 2);
    assert!(rows[1].starts_with("3,1,100,"));
}

#[test]
fn reruns_are_deterministic_in_the_statistics_columns() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    for (dir, workers) in [(&dir_a, 1usize), (&dir_b, 4usize)] {
        let manifest =
            parse_config(None, &tiny_sets(), None, None, dir.path(), workers, false).unwrap();
        cmd_sweep(&manifest).unwrap();
    }
    let a = read_rows(&dir_a.path().join("exact.csv"));
    let b = read_rows(&dir_b.path().join("exact.csv"));
    assert_eq!(a.len(), b.len());
    for (ra, rb) in a.iter().zip(b.iter()).skip(1) {
        assert_eq!(stats_columns(ra), stats_columns(rb));
    }
}

#[test]
fn compare_writes_one_labeled_curve_per_method() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = parse_config(
        None,
        &tiny_sets(),
        None,
        Some("exact,hard"),
        dir.path(),
        1,
        false,
    )
    .unwrap();
    cmd_sweep(&manifest).unwrap();
    assert!(dir.path().join("exact.csv").exists());
    assert!(dir.path().join("hard.csv").exists());
    assert!(dir.path().join("exact.json").exists());
    assert!(dir.path().join("hard.json").exists());
}

#[test]
fn outputs_are_never_clobbered_without_force() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = parse_config(None, &tiny_sets(), None, None, dir.path(), 1, false).unwrap();
    cmd_sweep(&manifest).unwrap();
    match cmd_sweep(&manifest) {
        Err(CliError::Config(msg)) => assert!(msg.contains("--force"), "message: {msg}"),
        other => panic!("expected overwrite refusal, got {other:?}"),
    }
    let forced = parse_config(None, &tiny_sets(), None, None, dir.path(), 1, true).unwrap();
    cmd_sweep(&forced).unwrap();
}

#[test]
fn psd_writes_both_spectra_and_orders_flatness() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = parse_config(None, &[], None, None, dir.path(), 1, false).unwrap();
    cmd_psd(&manifest, PhaseSelection::Both).unwrap();

    let summary: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("psd-summary.json")).unwrap(),
    )
    .unwrap();
    let none = summary["flatness_none"].as_f64().unwrap();
    let random = summary["flatness_random"].as_f64().unwrap();
    assert!(random > none, "random {random} vs none {none}");
    assert_eq!(summary["random_exceeds_none"], true);

    for tag in ["none", "random"] {
        let rows = read_rows(&dir.path().join(format!("psd-phase-{tag}.csv")));
        assert!(rows[0].starts_with("# segment_len=256"));
        assert_eq!(rows[1], "freq_normalized,psd_db");
        assert_eq!(rows.len(), 2 + 256);
    }
}

#[test]
fn psd_single_mode_writes_one_file() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = parse_config(None, &[], None, None, dir.path(), 1, false).unwrap();
    cmd_psd(&manifest, PhaseSelection::NoneOnly).unwrap();
    assert!(dir.path().join("psd-phase-none.csv").exists());
    assert!(!dir.path().join("psd-phase-random.csv").exists());
}

#[test]
fn file_then_set_then_seed_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(
        &path,
        "seed = 5\ninfo_length = 250\n\n[stop]\nmin_bit_errors = 42\n",
    )
    .unwrap();

    // File alone overrides the defaults.
    let m = parse_config(Some(&path), &[], None, None, dir.path(), 0, false).unwrap();
    assert_eq!(m.runs[0].config.seed, 5);
    assert_eq!(m.runs[0].config.info_length, 250);
    assert_eq!(m.runs[0].config.stop.min_bit_errors, 42);
    assert_eq!(m.runs[0].config.samples_per_half_bit, 2);

    // --set beats the file; --seed beats --set.
    let sets = vec!["seed=7".to_string(), "info_length=300".to_string()];
    let m = parse_config(Some(&path), &sets, Some(9), None, dir.path(), 0, false).unwrap();
    assert_eq!(m.runs[0].config.seed, 9);
    assert_eq!(m.runs[0].config.info_length, 300);
    assert_eq!(m.runs[0].config.stop.min_bit_errors, 42);

    // Unknown keys in the file are rejected by name.
    std::fs::write(&path, "mystery = 1\n").unwrap();
    match parse_config(Some(&path), &[], None, None, dir.path(), 0, false) {
        Err(CliError::Config(msg)) => assert!(msg.contains("mystery"), "message: {msg}"),
        other => panic!("expected config error, got {other:?}"),
    }
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_ooksim");
    let dir = tempfile::tempdir().unwrap();

    // Config errors exit 2.
    let out = Command::new(bin)
        .args(["--set", "foo=1", "--out"])
        .arg(dir.path())
        .arg("sweep")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("foo"));

    // A tiny sweep succeeds with exit 0.
    let out = Command::new(bin)
        .args([
            "--set",
            "info_length=100",
            "--set",
            "snr.grid_db=[2.0]",
            "--set",
            "stop.max_trials=2",
            "--set",
            "stop.min_bit_errors=1000000",
            "--out",
        ])
        .arg(dir.path())
        .args(["--workers", "1", "sweep"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("exact.csv").exists());
}
