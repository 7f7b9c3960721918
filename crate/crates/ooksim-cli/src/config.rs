//! Config file schema, layered resolution (defaults, file, overrides), and
//! the run manifest.
//!
//! The file format is TOML. Every key can also be set from the command line
//! with `--set dotted.path=value`; values are parsed as TOML literals and
//! fall back to strings, so `--set llr=hard` and `--set stop.max_trials=500`
//! both work. Unknown keys are rejected by name.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

use ooksim_core::channel::ChannelKind;
use ooksim_core::convcode::ConvCode;
use ooksim_core::demod::LlrMethod;
use ooksim_core::manchester::PhaseMode;
use ooksim_core::sim::{ChannelSetup, SimConfig, StopRule};

use crate::CliError;

/// On-disk configuration with the simulation-study defaults.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub seed: u64,
    /// Information bits per block (L).
    pub info_length: usize,
    /// Samples per Manchester half bit (T).
    pub samples_per_half_bit: usize,
    pub coding: bool,
    /// Octal generator pair, e.g. "15,13".
    pub generators: String,
    pub llr: LlrMethod,
    /// Rectangular interleaver row length; 0 disables interleaving.
    pub interleaver_block_size: usize,
    pub phase: PhaseMode,
    pub channel: ChannelSection,
    pub snr: SnrSection,
    pub stop: StopSection,
}

impl Default for FileConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            info_length: 1000,
            samples_per_half_bit: 2,
            coding: true,
            generators: "15,13".into(),
            llr: LlrMethod::Exact,
            interleaver_block_size: 0,
            phase: PhaseMode::Random,
            channel: ChannelSection::default(),
            snr: SnrSection::default(),
            stop: StopSection::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelSection {
    pub kind: ChannelKind,
    pub fading_block_periods: usize,
}

impl Default for ChannelSection {
    fn default() -> Self {
        Self {
            kind: ChannelKind::Awgn,
            fading_block_periods: 1003,
        }
    }
}

/// SNR grid: either an explicit `grid_db` list or a start/stop/step range.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SnrSection {
    pub start_db: f64,
    pub stop_db: f64,
    pub step_db: f64,
    pub grid_db: Option<Vec<f64>>,
}

impl Default for SnrSection {
    fn default() -> Self {
        Self {
            start_db: 0.0,
            stop_db: 10.0,
            step_db: 0.5,
            grid_db: None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StopSection {
    pub max_trials: u64,
    pub min_bit_errors: u64,
    pub max_bits: u64,
}

impl Default for StopSection {
    fn default() -> Self {
        let d = StopRule::default();
        Self {
            max_trials: d.max_trials,
            min_bit_errors: d.min_bit_errors,
            max_bits: d.max_bits,
        }
    }
}

impl FileConfig {
    pub fn resolve(&self) -> Result<SimConfig, CliError> {
        let code = ConvCode::from_octal_pair(&self.generators)
            .map_err(|e| CliError::Config(format!("generators: {e}")))?;
        let snr_grid_db = match &self.snr.grid_db {
            Some(grid) => grid.clone(),
            None => {
                let (start, stop, step) = (self.snr.start_db, self.snr.stop_db, self.snr.step_db);
                if !(step.is_finite() && step > 0.0) || stop < start {
                    return Err(CliError::Config(format!(
                        "snr: need stop_db >= start_db and step_db > 0 \
                         (got start {start}, stop {stop}, step {step})"
                    )));
                }
                let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
                (0..n).map(|i| start + i as f64 * step).collect()
            }
        };
        let cfg = SimConfig {
            info_length: self.info_length,
            samples_per_half_bit: self.samples_per_half_bit,
            code,
            coding_enabled: self.coding,
            channel: ChannelSetup {
                kind: self.channel.kind,
                fading_block_periods: self.channel.fading_block_periods,
            },
            llr_method: self.llr,
            interleaver_block_size: (self.interleaver_block_size > 0)
                .then_some(self.interleaver_block_size),
            phase_mode: self.phase,
            snr_grid_db,
            stop: StopRule {
                max_trials: self.stop.max_trials,
                min_bit_errors: self.stop.min_bit_errors,
                max_bits: self.stop.max_bits,
            },
            seed: self.seed,
        };
        cfg.validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        Ok(cfg)
    }
}

/// One resolved sweep with its output label.
#[derive(Clone, Debug, Serialize)]
pub struct LabeledRun {
    pub label: String,
    pub config: SimConfig,
}

/// Everything a command needs to run: resolved configs, output location,
/// and the hash identifying the exact parameter set.
#[derive(Clone, Debug)]
pub struct RunManifest {
    pub runs: Vec<LabeledRun>,
    pub out_dir: PathBuf,
    pub workers: usize,
    pub overwrite: bool,
    pub config_hash: String,
    pub created_unix: u64,
}

/// Layers defaults, the optional config file, `--set` overrides, and the
/// `--seed` shorthand, then resolves one labeled run per compared method.
pub fn parse_config(
    path: Option<&Path>,
    sets: &[String],
    seed_flag: Option<u64>,
    compare: Option<&str>,
    out_dir: &Path,
    workers: usize,
    overwrite: bool,
) -> Result<RunManifest, CliError> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?,
        None => String::new(),
    };
    let mut table: toml::Table = text
        .parse()
        .map_err(|e| CliError::Config(format!("config parse error: {e}")))?;
    for set in sets {
        apply_override(&mut table, set)?;
    }
    let mut file_cfg: FileConfig = table
        .try_into()
        .map_err(|e| CliError::Config(format!("config error: {e}")))?;
    if let Some(seed) = seed_flag {
        file_cfg.seed = seed;
    }

    let base = file_cfg.resolve()?;
    let runs: Vec<LabeledRun> = match compare {
        None => vec![LabeledRun {
            label: base.llr_method.name().to_string(),
            config: base,
        }],
        Some(list) => {
            let mut runs = Vec::new();
            for name in list.split(',') {
                let method: LlrMethod = name
                    .trim()
                    .parse()
                    .map_err(|e: ooksim_core::Error| CliError::Config(e.to_string()))?;
                runs.push(LabeledRun {
                    label: method.name().to_string(),
                    config: SimConfig {
                        llr_method: method,
                        ..base.clone()
                    },
                });
            }
            if runs.is_empty() {
                return Err(CliError::Config("--compare list is empty".into()));
            }
            runs
        }
    };

    let serialized = serde_json::to_string(&runs)
        .map_err(|e| CliError::Runtime(format!("config serialization failed: {e}")))?;
    let config_hash: String = Sha256::digest(serialized.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect();
    let created_unix = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);

    Ok(RunManifest {
        runs,
        out_dir: out_dir.to_path_buf(),
        workers,
        overwrite,
        config_hash,
        created_unix,
    })
}

/// Applies one `dotted.path=value` override to the parsed TOML tree.
fn apply_override(table: &mut toml::Table, set: &str) -> Result<(), CliError> {
    let (key, raw) = set
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override {set:?} is not key=value")))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(CliError::Config(format!("override {set:?} has an empty key")));
    }
    let value = parse_toml_value(raw.trim());

    let mut node = table;
    let parts: Vec<&str> = key.split('.').collect();
    for part in &parts[..parts.len() - 1] {
        node = node
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| {
                CliError::Config(format!("override {key:?}: {part:?} is not a table"))
            })?;
    }
    node.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

/// Parses the value side of an override as a TOML literal, falling back to a
/// plain string (so `llr=hard` needs no quoting).
fn parse_toml_value(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}
