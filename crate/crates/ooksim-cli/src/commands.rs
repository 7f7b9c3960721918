//! Subcommand implementations: `sweep`, `psd`, and `selftest`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use ooksim_core::manchester::{self, PhaseMode, WaveformConfig};
use ooksim_core::sim::{self, SimPointResult};
use ooksim_core::spectral::{self, DEFAULT_OVERLAP_FRAC, DEFAULT_SEGMENT_LEN};
use ooksim_core::types::{BitVec, RngStream, RNG_ALGORITHM};
use ooksim_core::{interleave, Error as CoreError};
use serde::Serialize;

use crate::config::{LabeledRun, RunManifest};
use crate::CliError;

pub const CSV_HEADER: &str =
    "snr_db,trials,info_bits,bit_errors,ber,ber_ci95,block_errors,bler,wall_time_s";

/// Formats one result row; the statistical columns are deterministic for a
/// given `(config, seed, build)`, wall time is informational.
pub fn format_csv_row(p: &SimPointResult) -> String {
    format!(
        "{},{},{},{},{:.6e},{:.6e},{},{:.6e},{:.3}",
        p.snr_db,
        p.trials,
        p.info_bits,
        p.bit_errors,
        p.ber,
        p.ber_ci95,
        p.block_errors,
        p.bler,
        p.wall_time_s
    )
}

#[derive(Serialize)]
struct Sidecar<'a> {
    label: &'a str,
    config: &'a ooksim_core::sim::SimConfig,
    rng_algorithm: &'a str,
    build_version: &'a str,
    config_hash: &'a str,
    created_unix: u64,
    workers: usize,
    csv: String,
}

/// Runs every labeled sweep in the manifest, writing one CSV plus one JSON
/// sidecar per curve. Rows are flushed as points complete.
pub fn cmd_sweep(manifest: &RunManifest) -> Result<(), CliError> {
    std::fs::create_dir_all(&manifest.out_dir)
        .map_err(|e| CliError::Runtime(format!("cannot create output dir: {e}")))?;
    for run in &manifest.runs {
        sweep_one(manifest, run)?;
    }
    Ok(())
}

fn sweep_one(manifest: &RunManifest, run: &LabeledRun) -> Result<(), CliError> {
    let csv_path = manifest.out_dir.join(format!("{}.csv", run.label));
    let json_path = manifest.out_dir.join(format!("{}.json", run.label));
    let sidecar = Sidecar {
        label: &run.label,
        config: &run.config,
        rng_algorithm: RNG_ALGORITHM,
        build_version: env!("CARGO_PKG_VERSION"),
        config_hash: &manifest.config_hash,
        created_unix: manifest.created_unix,
        workers: manifest.workers,
        csv: format!("{}.csv", run.label),
    };
    let json = serde_json::to_string_pretty(&sidecar)
        .map_err(|e| CliError::Runtime(format!("sidecar serialization failed: {e}")))?;
    write_all(&json_path, manifest.overwrite, json.as_bytes())?;

    let mut csv = BufWriter::new(create_output(&csv_path, manifest.overwrite)?);
    writeln!(csv, "{CSV_HEADER}").map_err(io_err)?;
    csv.flush().map_err(io_err)?;

    let total = run.config.snr_grid_db.len();
    let label = run.label.clone();
    let mut index = 0usize;
    sim::run_sweep_with(&run.config, manifest.workers, |point| {
        index += 1;
        eprintln!(
            "[{label}] point {index}/{total} snr={} dB: ber={:.3e} bler={:.3e} \
             trials={} bit_errors={} ({:.1} s)",
            point.snr_db, point.ber, point.bler, point.trials, point.bit_errors,
            point.wall_time_s
        );
        let _ = writeln!(csv, "{}", format_csv_row(point));
        let _ = csv.flush();
    })
    .map_err(core_err)?;
    Ok(())
}

/// Which transmit-phase settings `psd` evaluates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PhaseSelection {
    Both,
    NoneOnly,
    RandomOnly,
}

impl PhaseSelection {
    fn modes(self) -> &'static [PhaseMode] {
        match self {
            PhaseSelection::Both => &[PhaseMode::None, PhaseMode::Random],
            PhaseSelection::NoneOnly => &[PhaseMode::None],
            PhaseSelection::RandomOnly => &[PhaseMode::Random],
        }
    }
}

#[derive(Serialize)]
struct PsdSummary {
    flatness_none: Option<f64>,
    flatness_random: Option<f64>,
    random_exceeds_none: Option<bool>,
    segment_len: usize,
    overlap_frac: f64,
    window: &'static str,
    rng_algorithm: &'static str,
    build_version: &'static str,
    config_hash: String,
}

/// Synthesizes the configured coded frame with the selected phase modes and
/// writes one PSD CSV per mode plus a flatness summary. With both modes the
/// random-phase flatness must exceed the ideal-OOK flatness.
pub fn cmd_psd(manifest: &RunManifest, selection: PhaseSelection) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(&manifest.out_dir)
        .map_err(|e| CliError::Runtime(format!("cannot create output dir: {e}")))?;
    let cfg = &manifest.runs[0].config;

    // Same transmit chain as a sweep trial, minus the channel.
    let stream = RngStream::new(cfg.seed, 0).child(0);
    let info = BitVec::random(cfg.info_length, &mut stream.child(0).rng());
    let coded = if cfg.coding_enabled {
        cfg.code.encode(&info)
    } else {
        info
    };
    let tx_bits = match cfg.interleaver_block_size {
        Some(s) => {
            let spec = interleave::InterleaverSpec::new(s, coded.len()).map_err(core_err)?;
            BitVec::new(interleave::interleave(coded.as_slice(), &spec).map_err(core_err)?)
                .map_err(core_err)?
        }
        None => coded,
    };
    let chips = manchester::manchester_encode(&tx_bits);

    let mut flatness_none = None;
    let mut flatness_random = None;
    for &mode in selection.modes() {
        let frame = manchester::synthesize(
            &chips,
            &WaveformConfig {
                samples_per_half_bit: cfg.samples_per_half_bit,
                phase_mode: mode,
            },
            stream.child(1),
        )
        .map_err(core_err)?;
        let psd = spectral::estimate_psd(&frame, DEFAULT_SEGMENT_LEN, DEFAULT_OVERLAP_FRAC)
            .map_err(core_err)?;
        let flatness = spectral::spectral_flatness(&psd).map_err(core_err)?;
        let tag = match mode {
            PhaseMode::None => "none",
            PhaseMode::Random => "random",
        };
        let path = manifest.out_dir.join(format!("psd-phase-{tag}.csv"));
        let mut out = BufWriter::new(create_output(&path, manifest.overwrite)?);
        writeln!(
            out,
            "# segment_len={} overlap_frac={} window={} segments={} flatness={:.6} \
             rng={} config_hash={}",
            psd.params.segment_len,
            psd.params.overlap_frac,
            psd.params.window,
            psd.params.segments,
            flatness,
            RNG_ALGORITHM,
            manifest.config_hash
        )
        .map_err(io_err)?;
        writeln!(out, "freq_normalized,psd_db").map_err(io_err)?;
        for (f, db) in psd.freqs.iter().zip(psd.psd_db.iter()) {
            writeln!(out, "{f},{db:.6}").map_err(io_err)?;
        }
        out.flush().map_err(io_err)?;
        match mode {
            PhaseMode::None => flatness_none = Some(flatness),
            PhaseMode::Random => flatness_random = Some(flatness),
        }
    }

    let random_exceeds_none = match (flatness_random, flatness_none) {
        (Some(r), Some(n)) => Some(r > n),
        _ => None,
    };
    let summary = PsdSummary {
        flatness_none,
        flatness_random,
        random_exceeds_none,
        segment_len: DEFAULT_SEGMENT_LEN,
        overlap_frac: DEFAULT_OVERLAP_FRAC,
        window: "hann",
        rng_algorithm: RNG_ALGORITHM,
        build_version: env!("CARGO_PKG_VERSION"),
        config_hash: manifest.config_hash.clone(),
    };
    let summary_path = manifest.out_dir.join("psd-summary.json");
    let json = serde_json::to_string_pretty(&summary)
        .map_err(|e| CliError::Runtime(format!("summary serialization failed: {e}")))?;
    write_all(&summary_path, manifest.overwrite, json.as_bytes())?;

    match (flatness_random, flatness_none) {
        (Some(r), Some(n)) => {
            println!("flatness(random-phase) = {r:.6}, flatness(no-phase) = {n:.6}");
            if r > n {
                println!("ok: random-phase spectrum is flatter");
            } else {
                return Err(CliError::Runtime(format!(
                    "random-phase flatness {r:.6} does not exceed no-phase flatness {n:.6}"
                )));
            }
        }
        (Some(v), None) | (None, Some(v)) => println!("flatness = {v:.6}"),
        (None, None) => {}
    }
    Ok(summary_path)
}

/// Runs the fast property-check suite, printing one line per check.
pub fn cmd_selftest() -> Result<(), CliError> {
    let outcomes = ooksim_core::selftest::run_fast();
    let mut failures = 0;
    for o in &outcomes {
        let status = if o.passed { "PASS" } else { "FAIL" };
        println!("{status} {} - {}", o.name, o.detail);
        if !o.passed {
            failures += 1;
        }
    }
    if failures > 0 {
        return Err(CliError::Runtime(format!(
            "{failures} of {} self-test checks failed",
            outcomes.len()
        )));
    }
    println!("all {} checks passed", outcomes.len());
    Ok(())
}

/// Creates an output file, refusing to clobber existing results unless
/// `--force` was given.
fn create_output(path: &Path, overwrite: bool) -> Result<File, CliError> {
    if path.exists() && !overwrite {
        return Err(CliError::Config(format!(
            "output file {} exists (pass --force to overwrite)",
            path.display()
        )));
    }
    File::create(path).map_err(|e| {
        CliError::Runtime(format!("cannot create {}: {e}", path.display()))
    })
}

fn write_all(path: &Path, overwrite: bool, bytes: &[u8]) -> Result<(), CliError> {
    let mut f = create_output(path, overwrite)?;
    f.write_all(bytes).map_err(io_err)?;
    f.write_all(b"\n").map_err(io_err)
}

fn io_err(e: std::io::Error) -> CliError {
    CliError::Runtime(format!("i/o error: {e}"))
}

fn core_err(e: CoreError) -> CliError {
    CliError::Runtime(e.to_string())
}
