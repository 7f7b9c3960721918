//! Manchester chip mapping and time-domain waveform synthesis.
//!
//! Bit 1 maps to the chip pair (1, 0) and bit 0 to (0, 1), so every bit
//! period carries a mid-bit transition. Each chip expands to
//! `samples_per_half_bit` identical-amplitude samples; the transmit phase is
//! either zero everywhere or i.i.d. uniform per sample, which leaves sample
//! magnitudes untouched.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::types::{BitVec, ComplexSampleFrame, RngStream};

/// On-sample amplitude of the noiseless waveform.
pub const ON_AMPLITUDE: f64 = 1.0;

/// Transmit-phase behavior of the synthesized waveform.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhaseMode {
    /// Every sample keeps phase 0 (ideal OOK).
    None,
    /// Each sample gets an independent phase uniform on [0, 2pi).
    #[serde(alias = "uniform-per-sample")]
    Random,
}

/// Waveform synthesis parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WaveformConfig {
    pub samples_per_half_bit: usize,
    pub phase_mode: PhaseMode,
}

impl Default for WaveformConfig {
    fn default() -> Self {
        Self {
            samples_per_half_bit: 2,
            phase_mode: PhaseMode::Random,
        }
    }
}

/// Maps coded bits to Manchester chips: 1 -> (1, 0), 0 -> (0, 1).
pub fn manchester_encode(coded: &BitVec) -> BitVec {
    let mut chips = Vec::with_capacity(2 * coded.len());
    for &b in coded.iter() {
        chips.push(b);
        chips.push(1 - b);
    }
    BitVec::from_bits_unchecked(chips)
}

/// Exact inverse of [`manchester_encode`]; rejects chip pairs without a
/// transition.
pub fn manchester_decode_hard(chips: &BitVec) -> Result<BitVec> {
    if chips.len() % 2 != 0 {
        return Err(Error::BadFrameLength {
            len: chips.len(),
            period: 2,
        });
    }
    let mut bits = Vec::with_capacity(chips.len() / 2);
    for (i, pair) in chips.chunks(2).enumerate() {
        match (pair[0], pair[1]) {
            (1, 0) => bits.push(1),
            (0, 1) => bits.push(0),
            (a, b) => return Err(Error::BadChipPair(a, b, i)),
        }
    }
    Ok(BitVec::from_bits_unchecked(bits))
}

/// Expands chips into a complex baseband frame: each chip becomes
/// `samples_per_half_bit` samples of amplitude 1 (chip 1) or 0 (chip 0),
/// optionally phase-rotated per sample.
pub fn synthesize(
    chips: &BitVec,
    cfg: &WaveformConfig,
    stream: RngStream,
) -> Result<ComplexSampleFrame> {
    if cfg.samples_per_half_bit == 0 {
        return Err(Error::BadSamplesPerHalfBit);
    }
    if chips.len() % 2 != 0 {
        return Err(Error::BadFrameLength {
            len: chips.len(),
            period: 2,
        });
    }
    let t = cfg.samples_per_half_bit;
    let mut rng = stream.rng();
    let mut samples = Vec::with_capacity(chips.len() * t);
    for &chip in chips.iter() {
        let amplitude = if chip == 1 { ON_AMPLITUDE } else { 0.0 };
        for _ in 0..t {
            // One phase draw per sample in random mode, regardless of chip
            // value, so the draw count depends only on the frame geometry.
            let theta = match cfg.phase_mode {
                PhaseMode::None => 0.0,
                PhaseMode::Random => rng.random::<f64>() * TAU,
            };
            samples.push(Complex64::from_polar(amplitude, theta));
        }
    }
    ComplexSampleFrame::new(samples, t)
}
