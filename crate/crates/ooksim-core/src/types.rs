//! Shared domain types: bit and LLR containers, complex sample frames,
//! channel realizations, SNR conversion, and the deterministic RNG contract.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};

/// Generator recorded in output metadata so results stay auditable.
pub const RNG_ALGORITHM: &str = "chacha12/seed64+stream64";

/// Ordered bit sequence; index 0 is transmitted first.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BitVec {
    bits: Vec<u8>,
}

impl BitVec {
    /// Builds from raw bytes, rejecting anything that is not 0 or 1.
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        for (index, &value) in bits.iter().enumerate() {
            if value > 1 {
                return Err(Error::InvalidBit { index, value });
            }
        }
        Ok(Self { bits })
    }

    /// All-zero sequence of the given length.
    pub fn zeros(len: usize) -> Self {
        Self { bits: vec![0; len] }
    }

    /// Draws `len` fair bits from `rng`.
    pub fn random(len: usize, rng: &mut impl Rng) -> Self {
        Self {
            bits: (0..len).map(|_| u8::from(rng.random::<bool>())).collect(),
        }
    }

    /// Internal constructor for producers that only emit 0/1 by construction.
    pub(crate) fn from_bits_unchecked(bits: Vec<u8>) -> Self {
        debug_assert!(bits.iter().all(|&b| b <= 1));
        Self { bits }
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.bits
    }

    /// Number of bit positions differing from `other` (compared up to the
    /// shorter length).
    pub fn hamming_distance(&self, other: &Self) -> u64 {
        self.bits
            .iter()
            .zip(other.bits.iter())
            .filter(|(a, b)| a != b)
            .count() as u64
    }
}

impl std::ops::Deref for BitVec {
    type Target = [u8];
    fn deref(&self) -> &[u8] {
        &self.bits
    }
}

/// Per-coded-bit soft values; a positive value favors bit 1.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LlrVec {
    values: Vec<f64>,
}

impl LlrVec {
    /// Builds from raw values, rejecting non-finite entries.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        for (index, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFiniteLlr { index });
            }
        }
        Ok(Self { values })
    }

    /// Internal constructor for producers whose outputs are finite by
    /// construction.
    pub(crate) fn from_values_unchecked(values: Vec<f64>) -> Self {
        debug_assert!(values.iter().all(|v| v.is_finite()));
        Self { values }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }
}

impl std::ops::Deref for LlrVec {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.values
    }
}

/// Baseband complex samples grouped into Manchester bit periods of
/// `2 * samples_per_half_bit` samples.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexSampleFrame {
    samples: Vec<Complex64>,
    samples_per_half_bit: usize,
}

impl ComplexSampleFrame {
    pub fn new(samples: Vec<Complex64>, samples_per_half_bit: usize) -> Result<Self> {
        if samples_per_half_bit == 0 {
            return Err(Error::BadSamplesPerHalfBit);
        }
        let period = 2 * samples_per_half_bit;
        if samples.len() % period != 0 {
            return Err(Error::BadFrameLength {
                len: samples.len(),
                period,
            });
        }
        Ok(Self {
            samples,
            samples_per_half_bit,
        })
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn samples_per_half_bit(&self) -> usize {
        self.samples_per_half_bit
    }

    /// Number of Manchester bit periods in the frame.
    pub fn periods(&self) -> usize {
        self.samples.len() / (2 * self.samples_per_half_bit)
    }
}

/// Per-period complex gains plus the noise power that produced a received
/// frame. Gains within one fading block are identical by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelRealization {
    gains: Vec<Complex64>,
    noise_power: f64,
}

impl ChannelRealization {
    pub fn new(gains: Vec<Complex64>, noise_power: f64) -> Result<Self> {
        if !(noise_power.is_finite() && noise_power > 0.0) {
            return Err(Error::BadNoisePower(noise_power));
        }
        Ok(Self { gains, noise_power })
    }

    pub fn gains(&self) -> &[Complex64] {
        &self.gains
    }

    pub fn noise_power(&self) -> f64 {
        self.noise_power
    }
}

/// Value-type handle for a deterministic random stream.
///
/// The same `(seed, stream_id)` pair always yields the same sample sequence;
/// streams derived with [`RngStream::child`] are independent of the parent
/// and of each other.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
}

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer; full 64-bit avalanche.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// Derives the `child_id`-th child stream. Deterministic: the same
    /// `(parent, child_id)` always yields the same child, distinct ids yield
    /// distinct children, and children never coincide with the parent.
    pub fn child(self, child_id: u64) -> Self {
        let tag = mix64(self.stream_id ^ mix64(child_id.wrapping_add(GOLDEN_GAMMA)));
        Self {
            seed: mix64(self.seed.wrapping_add(tag)),
            stream_id: tag,
        }
    }

    /// Instantiates the generator positioned at the start of the stream.
    pub fn rng(self) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// Converts SNR in dB to complex noise power per sample, with the on-sample
/// amplitude fixed at 1: sigma^2 = 10^(-snr_db / 10).
pub fn snr_db_to_noise_power(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}

/// Inverse of [`snr_db_to_noise_power`].
pub fn noise_power_to_snr_db(noise_power: f64) -> f64 {
    -10.0 * noise_power.log10()
}
