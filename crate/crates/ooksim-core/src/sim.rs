//! Monte-Carlo experiment engine: per-trial TX->channel->RX chains, SNR
//! sweeps with deterministic parallel scheduling, and dB-gap measurement
//! between result curves.
//!
//! Determinism contract: trial `i` of a sweep draws everything from
//! `RngStream::new(seed, 0).child(i)`, and a point stops after the smallest
//! trial prefix that satisfies a stop rule. Results are therefore a pure
//! function of `(config, seed)`, independent of worker count and completion
//! order; merged statistics are integer counts only.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::time::Instant;

use crate::channel::{self, ChannelConfig, ChannelKind};
use crate::convcode::ConvCode;
use crate::demod::{self, LlrMethod};
use crate::error::{Error, Result};
use crate::interleave::{self, InterleaverSpec};
use crate::manchester::{self, PhaseMode, WaveformConfig};
use crate::types::{snr_db_to_noise_power, BitVec, LlrVec, RngStream};

/// Channel model of a sweep; the per-point noise power comes from the SNR
/// grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelSetup {
    pub kind: ChannelKind,
    pub fading_block_periods: usize,
}

impl Default for ChannelSetup {
    fn default() -> Self {
        Self {
            kind: ChannelKind::Awgn,
            fading_block_periods: 1003,
        }
    }
}

/// Per-point stopping rule: a point ends at the first trial where the error
/// target is met, or when a trial or bit budget runs out.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StopRule {
    pub max_trials: u64,
    pub min_bit_errors: u64,
    pub max_bits: u64,
}

impl Default for StopRule {
    fn default() -> Self {
        Self {
            max_trials: 1_000_000,
            min_bit_errors: 200,
            max_bits: 100_000_000,
        }
    }
}

/// Full description of one simulated configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Information bits per block (L).
    pub info_length: usize,
    /// Samples per Manchester half bit (T).
    pub samples_per_half_bit: usize,
    pub code: ConvCode,
    /// When false, info bits go straight to Manchester/OOK (uncoded baseline).
    pub coding_enabled: bool,
    pub channel: ChannelSetup,
    pub llr_method: LlrMethod,
    /// Rectangular interleaver row length; `None` disables interleaving.
    pub interleaver_block_size: Option<usize>,
    pub phase_mode: PhaseMode,
    pub snr_grid_db: Vec<f64>,
    pub stop: StopRule,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            info_length: 1000,
            samples_per_half_bit: 2,
            code: ConvCode::default(),
            coding_enabled: true,
            channel: ChannelSetup::default(),
            llr_method: LlrMethod::Exact,
            interleaver_block_size: None,
            phase_mode: PhaseMode::Random,
            snr_grid_db: (0..=20).map(|i| f64::from(i) * 0.5).collect(),
            stop: StopRule::default(),
            seed: 1,
        }
    }
}

impl SimConfig {
    /// Number of Manchester bit periods per transmitted frame.
    pub fn coded_len(&self) -> usize {
        if self.coding_enabled {
            self.code.coded_len(self.info_length)
        } else {
            self.info_length
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.info_length == 0 {
            return Err(Error::BadConfig("info_length must be >= 1".into()));
        }
        if self.samples_per_half_bit == 0 {
            return Err(Error::BadConfig("samples_per_half_bit must be >= 1".into()));
        }
        if self.channel.fading_block_periods == 0 {
            return Err(Error::BadConfig("fading_block_periods must be >= 1".into()));
        }
        if self.snr_grid_db.is_empty() {
            return Err(Error::BadConfig("snr_grid_db must not be empty".into()));
        }
        if self.snr_grid_db.iter().any(|v| !v.is_finite()) {
            return Err(Error::BadConfig("snr_grid_db must be finite".into()));
        }
        if self.stop.min_bit_errors == 0 {
            return Err(Error::BadConfig("min_bit_errors must be >= 1".into()));
        }
        if self.stop.max_trials == 0 {
            return Err(Error::BadConfig("max_trials must be >= 1".into()));
        }
        if self.interleaver_block_size == Some(0) {
            return Err(Error::BadConfig(
                "interleaver_block_size must be >= 1 (omit it to disable)".into(),
            ));
        }
        Ok(())
    }

    fn interleaver_spec(&self) -> Result<Option<InterleaverSpec>> {
        self.interleaver_block_size
            .map(|s| InterleaverSpec::new(s, self.coded_len()))
            .transpose()
    }
}

/// Outcome of one simulated block.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrialOutcome {
    pub bit_errors: u64,
    pub block_error: bool,
}

/// Accumulated statistics for one (SNR, configuration) point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimPointResult {
    pub snr_db: f64,
    pub trials: u64,
    pub info_bits: u64,
    pub bit_errors: u64,
    pub block_errors: u64,
    pub ber: f64,
    pub bler: f64,
    /// Half-width of the 95% normal-approximation BER interval.
    pub ber_ci95: f64,
    pub wall_time_s: f64,
}

const CHILD_INFO: u64 = 0;
const CHILD_PHASE: u64 = 1;
const CHILD_CHANNEL: u64 = 2;

/// Simulates one block through the full chain and counts information-bit
/// errors against the transmitted bits.
pub fn run_trial(cfg: &SimConfig, snr_db: f64, trial_rng: RngStream) -> Result<TrialOutcome> {
    let chan_cfg = ChannelConfig {
        kind: cfg.channel.kind,
        noise_power: snr_db_to_noise_power(snr_db),
        fading_block_periods: cfg.channel.fading_block_periods,
    };
    let ileaver = cfg.interleaver_spec()?;

    let info = BitVec::random(cfg.info_length, &mut trial_rng.child(CHILD_INFO).rng());
    let coded = if cfg.coding_enabled {
        cfg.code.encode(&info)
    } else {
        info.clone()
    };
    let tx_bits = match &ileaver {
        Some(spec) => BitVec::new(interleave::interleave(coded.as_slice(), spec)?)?,
        None => coded,
    };
    let chips = manchester::manchester_encode(&tx_bits);
    let wave = WaveformConfig {
        samples_per_half_bit: cfg.samples_per_half_bit,
        phase_mode: cfg.phase_mode,
    };
    let tx = manchester::synthesize(&chips, &wave, trial_rng.child(CHILD_PHASE))?;
    let (rx, realization) = channel::apply(&tx, &chan_cfg, trial_rng.child(CHILD_CHANNEL))?;
    let env = demod::envelope(&rx);
    let llrs = demod::compute_llrs(cfg.llr_method, &env, &realization)?;
    let llrs = match &ileaver {
        Some(spec) => LlrVec::new(interleave::deinterleave(llrs.as_slice(), spec)?)?,
        None => llrs,
    };

    let decided = if cfg.coding_enabled {
        cfg.code.viterbi_decode(&llrs)?.decoded_bits
    } else {
        // Per-bit sign decision; ties to 1, matching the hard rule.
        BitVec::new(llrs.iter().map(|&v| u8::from(v >= 0.0)).collect())?
    };

    let bit_errors = info.hamming_distance(&decided);
    Ok(TrialOutcome {
        bit_errors,
        block_error: bit_errors > 0,
    })
}

/// Trials dispatched to the worker pool per scheduling round. Results do not
/// depend on this value: a point always keeps the smallest trial prefix that
/// satisfies the stop rule.
const TRIAL_BATCH: u64 = 64;

/// Runs the full SNR sweep, calling `on_point` as each point completes.
pub fn run_sweep_with(
    cfg: &SimConfig,
    workers: usize,
    mut on_point: impl FnMut(&SimPointResult),
) -> Result<Vec<SimPointResult>> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::WorkerPool(e.to_string()))?;
    let master = RngStream::new(cfg.seed, 0);
    let block_bits = cfg.info_length as u64;
    let mut results = Vec::with_capacity(cfg.snr_grid_db.len());

    for &snr_db in &cfg.snr_grid_db {
        let start = Instant::now();
        let mut trials = 0u64;
        let mut bit_errors = 0u64;
        let mut block_errors = 0u64;
        let stop = &cfg.stop;

        'point: loop {
            let batch = TRIAL_BATCH.min(stop.max_trials - trials);
            let outcomes: Result<Vec<TrialOutcome>> = pool.install(|| {
                (trials..trials + batch)
                    .into_par_iter()
                    .map(|i| run_trial(cfg, snr_db, master.child(i)))
                    .collect()
            });
            for outcome in outcomes? {
                trials += 1;
                bit_errors += outcome.bit_errors;
                block_errors += u64::from(outcome.block_error);
                if bit_errors >= stop.min_bit_errors
                    || trials >= stop.max_trials
                    || trials.saturating_mul(block_bits) >= stop.max_bits
                {
                    break 'point;
                }
            }
        }

        let info_bits = trials * block_bits;
        let ber = bit_errors as f64 / info_bits as f64;
        let point = SimPointResult {
            snr_db,
            trials,
            info_bits,
            bit_errors,
            block_errors,
            ber,
            bler: block_errors as f64 / trials as f64,
            ber_ci95: 1.96 * (ber * (1.0 - ber) / info_bits as f64).sqrt(),
            wall_time_s: start.elapsed().as_secs_f64(),
        };
        on_point(&point);
        results.push(point);
    }
    Ok(results)
}

/// [`run_sweep_with`] without an observer.
pub fn run_sweep(cfg: &SimConfig, workers: usize) -> Result<Vec<SimPointResult>> {
    run_sweep_with(cfg, workers, |_| {})
}

/// Which column of a result curve a gap is measured on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GapMetric {
    Ber,
    Bler,
}

impl GapMetric {
    fn value(self, p: &SimPointResult) -> f64 {
        match self {
            GapMetric::Ber => p.ber,
            GapMetric::Bler => p.bler,
        }
    }

    fn name(self) -> &'static str {
        match self {
            GapMetric::Ber => "ber",
            GapMetric::Bler => "bler",
        }
    }
}

/// SNR (dB) at which `curve` crosses `level`, by linear interpolation in
/// (snr_db, log10 metric). The first bracketing grid interval from the low
/// SNR side is used; both endpoints must be positive.
pub fn snr_at_level(curve: &[SimPointResult], level: f64, metric: GapMetric) -> Result<f64> {
    let not_bracketed = || Error::LevelNotBracketed {
        level,
        metric: metric.name(),
    };
    if !(level.is_finite() && level > 0.0) {
        return Err(not_bracketed());
    }
    for pair in curve.windows(2) {
        let (a, b) = (metric.value(&pair[0]), metric.value(&pair[1]));
        if !(a > 0.0 && b > 0.0) {
            continue;
        }
        if (a - level) * (b - level) <= 0.0 {
            if a == b {
                return Ok(pair[0].snr_db);
            }
            let f = (level.log10() - a.log10()) / (b.log10() - a.log10());
            return Ok(pair[0].snr_db + f * (pair[1].snr_db - pair[0].snr_db));
        }
    }
    Err(not_bracketed())
}

/// SNR gap `snr(curve_b) - snr(curve_a)` where each curve crosses `level`;
/// positive means `curve_a` reaches the level at lower SNR.
pub fn db_gap_at_level(
    curve_a: &[SimPointResult],
    curve_b: &[SimPointResult],
    level: f64,
    metric: GapMetric,
) -> Result<f64> {
    Ok(snr_at_level(curve_b, level, metric)? - snr_at_level(curve_a, level, metric)?)
}
