//! Welch-method power spectral density estimation and spectral flatness.
//!
//! Complex frames are cut into overlapping Hann-windowed segments; averaged
//! periodograms give a two-sided density over normalized frequency
//! (cycles/sample, -0.5 to 0.5). The normalization is chosen so the density
//! integrates to the mean-square sample value.

use rustfft::FftPlanner;
use serde::Serialize;
use std::f64::consts::{LN_10, TAU};

use crate::error::{Error, Result};
use crate::types::ComplexSampleFrame;

pub const DEFAULT_SEGMENT_LEN: usize = 256;
pub const DEFAULT_OVERLAP_FRAC: f64 = 0.5;

/// Estimator settings recorded alongside the estimate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PsdParams {
    pub segment_len: usize,
    pub overlap_frac: f64,
    pub window: &'static str,
    pub segments: usize,
}

/// Averaged two-sided PSD over normalized frequency.
#[derive(Clone, Debug, PartialEq)]
pub struct PsdEstimate {
    /// Bin centers in cycles/sample, ascending from -0.5.
    pub freqs: Vec<f64>,
    /// Per-bin density in dB.
    pub psd_db: Vec<f64>,
    pub params: PsdParams,
}

/// Welch estimate: Hann-windowed segments with fractional overlap, averaged
/// magnitude-squared transforms, window-compensated density normalization.
pub fn estimate_psd(
    frame: &ComplexSampleFrame,
    segment_len: usize,
    overlap_frac: f64,
) -> Result<PsdEstimate> {
    if segment_len < 8 {
        return Err(Error::BadSegmentLength(segment_len));
    }
    if !(0.0..1.0).contains(&overlap_frac) {
        return Err(Error::BadOverlap(overlap_frac));
    }
    let samples = frame.samples();
    if samples.len() < segment_len {
        return Err(Error::FrameTooShort {
            len: samples.len(),
            segment: segment_len,
        });
    }

    let n = segment_len;
    let hop = n - (overlap_frac * n as f64).floor() as usize;
    let window: Vec<f64> = (0..n)
        .map(|i| 0.5 * (1.0 - (TAU * i as f64 / n as f64).cos()))
        .collect();
    let window_energy: f64 = window.iter().map(|w| w * w).sum();

    let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
    let mut acc = vec![0.0f64; n];
    let mut buf = vec![num_complex::Complex64::default(); n];
    let mut segments = 0usize;
    let mut start = 0usize;
    while start + n <= samples.len() {
        for (i, slot) in buf.iter_mut().enumerate() {
            *slot = samples[start + i] * window[i];
        }
        fft.process(&mut buf);
        for (a, v) in acc.iter_mut().zip(buf.iter()) {
            *a += v.norm_sqr();
        }
        segments += 1;
        start += hop;
    }

    // Density over normalized frequency (fs = 1); Parseval then gives
    // sum(psd)/n ~= mean |x|^2 for stationary input.
    let norm = 1.0 / (segments as f64 * window_energy);
    let mut freqs = Vec::with_capacity(n);
    let mut psd_db = Vec::with_capacity(n);
    for j in 0..n {
        let bin = (j + n / 2) % n; // fftshift
        freqs.push((j as f64 - (n / 2) as f64) / n as f64);
        psd_db.push(10.0 * (acc[bin] * norm).log10());
    }
    Ok(PsdEstimate {
        freqs,
        psd_db,
        params: PsdParams {
            segment_len,
            overlap_frac,
            window: "hann",
            segments,
        },
    })
}

/// Geometric-to-arithmetic mean ratio of the linear-power bins; 1 for a
/// perfectly flat spectrum, tending to 0 as power concentrates in one bin.
pub fn spectral_flatness(psd: &PsdEstimate) -> Result<f64> {
    let n = psd.psd_db.len() as f64;
    let mut log_sum = 0.0;
    let mut lin_sum = 0.0;
    for (index, &db) in psd.psd_db.iter().enumerate() {
        if !db.is_finite() {
            return Err(Error::NonPositiveBin { index });
        }
        log_sum += db * (LN_10 / 10.0);
        lin_sum += 10f64.powf(db / 10.0);
    }
    let ratio = (log_sum / n).exp() / (lin_sum / n);
    Ok(ratio.min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manchester::{self, PhaseMode, WaveformConfig};
    use crate::types::{BitVec, RngStream};
    use num_complex::Complex64;
    use std::f64::consts::TAU;

    fn frame_of(samples: Vec<Complex64>) -> ComplexSampleFrame {
        ComplexSampleFrame::new(samples, 1).unwrap()
    }

    #[test]
    fn constant_frame_concentrates_at_dc() {
        let frame = frame_of(vec![Complex64::new(1.0, 0.0); 4096]);
        let psd = estimate_psd(&frame, 256, 0.5).unwrap();
        let dc_idx = psd.freqs.iter().position(|&f| f == 0.0).unwrap();
        let mut sorted = psd.psd_db.clone();
        sorted.sort_by(|a, b| a.total_cmp(b));
        let median = sorted[sorted.len() / 2];
        assert!(psd.psd_db[dc_idx] - median >= 30.0);
        let max = psd.psd_db.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(psd.psd_db[dc_idx], max);
    }

    #[test]
    fn tone_localizes_to_its_bin() {
        let n = 256;
        let k = 40; // cycles per segment
        let samples: Vec<Complex64> = (0..4 * n)
            .map(|i| Complex64::from_polar(1.0, TAU * k as f64 * i as f64 / n as f64))
            .collect();
        let psd = estimate_psd(&frame_of(samples), n, 0.0).unwrap();
        let peak = psd
            .psd_db
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap();
        assert!((psd.freqs[peak] - k as f64 / n as f64).abs() < 1e-12);
    }

    #[test]
    fn total_power_is_window_compensated() {
        // Random-phase OOK frame: stationary, mean-square 0.5.
        let bits = BitVec::random(4000, &mut RngStream::new(31, 0).rng());
        let chips = manchester::manchester_encode(&bits);
        let frame = manchester::synthesize(
            &chips,
            &WaveformConfig {
                samples_per_half_bit: 2,
                phase_mode: PhaseMode::Random,
            },
            RngStream::new(31, 1),
        )
        .unwrap();
        let mean_sq: f64 = frame.samples().iter().map(|s| s.norm_sqr()).sum::<f64>()
            / frame.samples().len() as f64;
        let psd = estimate_psd(&frame, 256, 0.5).unwrap();
        let integrated: f64 = psd
            .psd_db
            .iter()
            .map(|db| 10f64.powf(db / 10.0))
            .sum::<f64>()
            / 256.0;
        assert!(
            (integrated - mean_sq).abs() / mean_sq < 0.03,
            "integrated {integrated} vs mean square {mean_sq}"
        );
    }

    #[test]
    fn flatness_extremes() {
        let flat = PsdEstimate {
            freqs: vec![0.0; 8],
            psd_db: vec![3.0; 8],
            params: PsdParams {
                segment_len: 8,
                overlap_frac: 0.0,
                window: "hann",
                segments: 1,
            },
        };
        assert!((spectral_flatness(&flat).unwrap() - 1.0).abs() < 1e-12);

        let spiky = PsdEstimate {
            psd_db: vec![60.0, -120.0, -120.0, -120.0, -120.0, -120.0, -120.0, -120.0],
            ..flat.clone()
        };
        assert!(spectral_flatness(&spiky).unwrap() < 1e-6);

        let bad = PsdEstimate {
            psd_db: vec![0.0, f64::NEG_INFINITY, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            ..flat
        };
        assert!(spectral_flatness(&bad).is_err());
    }

    #[test]
    fn white_noise_is_nearly_flat() {
        use rand::Rng;
        let mut rng = RngStream::new(32, 0).rng();
        let samples: Vec<Complex64> = (0..1_000_000)
            .map(|_| {
                Complex64::from_polar(
                    (-2.0 * rng.random::<f64>().max(1e-300).ln()).sqrt(),
                    rng.random::<f64>() * TAU,
                )
            })
            .collect();
        let psd = estimate_psd(&frame_of(samples), 256, 0.5).unwrap();
        assert!(spectral_flatness(&psd).unwrap() >= 0.9);
    }

    #[test]
    fn random_phase_flattens_ook_spectrum() {
        let bits = BitVec::random(50_000, &mut RngStream::new(33, 0).rng());
        let chips = manchester::manchester_encode(&bits);
        let mut flatness = Vec::new();
        for mode in [PhaseMode::Random, PhaseMode::None] {
            let frame = manchester::synthesize(
                &chips,
                &WaveformConfig {
                    samples_per_half_bit: 2,
                    phase_mode: mode,
                },
                RngStream::new(33, 1),
            )
            .unwrap();
            assert!(frame.samples().len() >= 200_000);
            let psd = estimate_psd(&frame, 256, 0.5).unwrap();
            flatness.push(spectral_flatness(&psd).unwrap());
        }
        assert!(
            flatness[0] > flatness[1],
            "random {} vs none {}",
            flatness[0],
            flatness[1]
        );
    }

    #[test]
    fn estimator_rejects_bad_parameters() {
        let frame = frame_of(vec![Complex64::new(1.0, 0.0); 64]);
        assert!(estimate_psd(&frame, 4, 0.5).is_err());
        assert!(estimate_psd(&frame, 128, 0.5).is_err());
        assert!(estimate_psd(&frame, 32, 1.0).is_err());
        assert!(estimate_psd(&frame, 32, -0.1).is_err());
        assert!(estimate_psd(&frame, 64, 0.25).is_ok());
    }
}
