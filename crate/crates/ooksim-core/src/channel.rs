//! AWGN and block-Rayleigh fading channel application.
//!
//! The received sample is `h_i * x + n` with `n ~ CN(0, sigma^2)` (total
//! variance split equally between real and imaginary parts). Under AWGN every
//! per-period gain is 1; under block Rayleigh one gain `h ~ CN(0, 1)` is
//! drawn per block of `fading_block_periods` consecutive Manchester bit
//! periods and held constant inside the block.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};
use crate::types::{ChannelRealization, ComplexSampleFrame, RngStream};

/// Channel model selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelKind {
    Awgn,
    #[serde(alias = "rayleigh")]
    BlockRayleigh,
}

/// Parameters for one channel application.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelConfig {
    pub kind: ChannelKind,
    /// Complex noise power sigma^2 per sample (linear).
    pub noise_power: f64,
    /// Manchester bit periods sharing one fading gain. A final short block is
    /// allowed when the frame length is not a multiple.
    pub fading_block_periods: usize,
}

/// Applies the channel to a transmit frame, returning the received frame and
/// the realization (exact per-period gains and noise power) that produced it.
pub fn apply(
    tx: &ComplexSampleFrame,
    cfg: &ChannelConfig,
    stream: RngStream,
) -> Result<(ComplexSampleFrame, ChannelRealization)> {
    if !(cfg.noise_power.is_finite() && cfg.noise_power > 0.0) {
        return Err(Error::BadNoisePower(cfg.noise_power));
    }
    if cfg.fading_block_periods == 0 {
        return Err(Error::BadConfig(
            "fading_block_periods must be >= 1".into(),
        ));
    }

    let periods = tx.periods();
    let gains: Vec<Complex64> = match cfg.kind {
        ChannelKind::Awgn => vec![Complex64::new(1.0, 0.0); periods],
        ChannelKind::BlockRayleigh => {
            let mut gain_rng = stream.child(0).rng();
            let blocks = periods.div_ceil(cfg.fading_block_periods);
            let mut gains = Vec::with_capacity(periods);
            for _ in 0..blocks {
                let re: f64 = gain_rng.sample(StandardNormal);
                let im: f64 = gain_rng.sample(StandardNormal);
                let h = Complex64::new(re, im) * FRAC_1_SQRT_2;
                let in_block = cfg.fading_block_periods.min(periods - gains.len());
                gains.extend(std::iter::repeat(h).take(in_block));
            }
            gains
        }
    };

    let mut noise_rng = stream.child(1).rng();
    let noise_scale = (cfg.noise_power / 2.0).sqrt();
    let samples_per_period = 2 * tx.samples_per_half_bit();
    let rx: Vec<Complex64> = tx
        .samples()
        .iter()
        .enumerate()
        .map(|(n, &x)| {
            let h = gains[n / samples_per_period];
            let re: f64 = noise_rng.sample(StandardNormal);
            let im: f64 = noise_rng.sample(StandardNormal);
            h * x + Complex64::new(re, im) * noise_scale
        })
        .collect();

    let rx = ComplexSampleFrame::new(rx, tx.samples_per_half_bit())?;
    let realization = ChannelRealization::new(gains, cfg.noise_power)?;
    Ok((rx, realization))
}
