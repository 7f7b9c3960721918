//! Fast self-verification suite behind the `selftest` CLI subcommand.
//!
//! Every check is a pure function returning a [`CheckOutcome`] with the
//! measured numbers, so the same checks back both the command-line entry
//! point and the acceptance tests. The full suite completes in well under a
//! minute.

use num_complex::Complex64;
use rand::Rng;

use crate::channel::{self, ChannelConfig, ChannelKind};
use crate::convcode::{exhaustive_ml_decode, ConvCode};
use crate::demod::{self, LlrMethod};
use crate::interleave::{self, InterleaverSpec};
use crate::manchester::{self, PhaseMode, WaveformConfig};
use crate::sim::{self, SimConfig, StopRule};
use crate::types::{BitVec, ChannelRealization, ComplexSampleFrame, LlrVec, RngStream};

/// Result of one named check.
#[derive(Clone, Debug)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self {
            name,
            passed,
            detail,
        }
    }
}

/// Runs the whole fast suite.
pub fn run_fast() -> Vec<CheckOutcome> {
    vec![
        check_log_i0_kernel(),
        check_viterbi_matches_exhaustive(),
        check_manchester_roundtrip(),
        check_interleaver_roundtrip(),
        check_llr_antisymmetry(),
        check_scale_free_decision_invariance(),
        check_channel_calibration(),
        check_noiseless_chain(),
        check_scheduling_invariance(),
    ]
}

/// ln I0 kernel vs the quadrature oracle on a 10^4-point grid over [0, 700];
/// tolerance 1e-9 * max(1, x).
pub fn check_log_i0_kernel() -> CheckOutcome {
    const POINTS: usize = 10_000;
    let mut worst = 0.0f64;
    let mut worst_x = 0.0f64;
    for i in 0..POINTS {
        let x = 700.0 * i as f64 / (POINTS - 1) as f64;
        let fast = demod::log_bessel_i0(x).expect("grid point in domain");
        let slow = demod::log_bessel_i0_oracle(x).expect("grid point in range");
        let ratio = (fast - slow).abs() / x.max(1.0);
        if ratio > worst {
            worst = ratio;
            worst_x = x;
        }
    }
    CheckOutcome::new(
        "log-i0-kernel-vs-oracle",
        worst <= 1e-9,
        format!("max |err|/max(1,x) = {worst:.3e} at x = {worst_x:.2} (tol 1e-9, 10^4 points)"),
    )
}

/// Viterbi equals the exhaustive maximum-likelihood reference (metric and
/// bits) on random soft and tie-heavy hard inputs, L <= 12.
pub fn check_viterbi_matches_exhaustive() -> CheckOutcome {
    let code = ConvCode::default();
    let mut rng = RngStream::new(0x5e1f, 1).rng();
    let mut checked = 0u32;
    for trial in 0..250u64 {
        let info_len = 1 + (trial as usize % 12);
        let n = code.coded_len(info_len);
        let values: Vec<f64> = if trial % 3 == 0 {
            (0..n)
                .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
                .collect()
        } else {
            (0..n).map(|_| rng.random::<f64>() * 10.0 - 5.0).collect()
        };
        let llrs = LlrVec::new(values).expect("finite by construction");
        let fast = code.viterbi_decode(&llrs).expect("valid length");
        let slow = exhaustive_ml_decode(&llrs, &code).expect("valid length");
        if fast.metric != slow.metric || fast.decoded_bits != slow.decoded_bits {
            return CheckOutcome::new(
                "viterbi-vs-exhaustive-ml",
                false,
                format!("mismatch at instance {trial} (L = {info_len})"),
            );
        }
        checked += 1;
    }
    CheckOutcome::new(
        "viterbi-vs-exhaustive-ml",
        true,
        format!("{checked} random instances, L in 1..=12, metrics and bits identical"),
    )
}

/// Manchester decode(encode(x)) identity on random inputs up to 10^4 bits.
pub fn check_manchester_roundtrip() -> CheckOutcome {
    let mut rng = RngStream::new(0x5e1f, 2).rng();
    for round in 0..50 {
        let len = if round == 0 { 10_000 } else { rng.random::<u32>() as usize % ER_LEN };
        let bits = BitVec::random(len, &mut rng);
        let back = manchester::manchester_decode_hard(&manchester::manchester_encode(&bits));
        match back {
            Ok(b) if b == bits => {}
            _ => {
                return CheckOutcome::new(
                    "manchester-roundtrip",
                    false,
                    format!("roundtrip failed at round {round} (len {len})"),
                )
            }
        }
    }
    CheckOutcome::new(
        "manchester-roundtrip",
        true,
        "50 random inputs up to 10^4 bits".into(),
    )
}

const ER_LEN: usize = 2048;

/// Interleave/deinterleave identity and bijectivity across the shipped
/// geometries plus non-divisible lengths.
pub fn check_interleaver_roundtrip() -> CheckOutcome {
    let mut rng = RngStream::new(0x5e1f, 3).rng();
    for &(s, n) in &[
        (1usize, 2006usize),
        (2, 2006),
        (17, 2006),
        (118, 2006),
        (7, 53),
        (10, 1000),
    ] {
        let spec = InterleaverSpec::new(s, n).expect("valid spec");
        let data: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let perm = interleave::interleave(&data, &spec).expect("length matches");
        let mut sorted = perm.clone();
        sorted.sort_by(f64::total_cmp);
        let mut expect = data.clone();
        expect.sort_by(f64::total_cmp);
        let back = interleave::deinterleave(&perm, &spec).expect("length matches");
        if sorted != expect || back != data {
            return CheckOutcome::new(
                "interleaver-roundtrip",
                false,
                format!("failed for S = {s}, N = {n}"),
            );
        }
    }
    CheckOutcome::new(
        "interleaver-roundtrip",
        true,
        "identity and bijectivity for S in {1,2,17,118,7,10}".into(),
    )
}

/// Swapping the half-periods negates every soft metric element-wise, bit for
/// bit.
pub fn check_llr_antisymmetry() -> CheckOutcome {
    let mut rng = RngStream::new(0x5e1f, 4).rng();
    let t = 2;
    for round in 0..100 {
        let periods = 32;
        let mags: Vec<f64> = (0..periods * 2 * t).map(|_| rng.random::<f64>() * 4.0).collect();
        let swapped: Vec<f64> = mags
            .chunks(2 * t)
            .flat_map(|p| p[t..].iter().chain(p[..t].iter()).copied().collect::<Vec<_>>())
            .collect();
        let env = demod::EnvelopeFrame::new(mags, t).expect("valid frame");
        let env_sw = demod::EnvelopeFrame::new(swapped, t).expect("valid frame");
        let gain = Complex64::from_polar(rng.random::<f64>() * 2.0, rng.random::<f64>());
        let ch = ChannelRealization::new(vec![gain; periods], 0.1 + rng.random::<f64>())
            .expect("positive noise power");
        let pairs = [
            (
                demod::llr_exact(&env, &ch).expect("periods match"),
                demod::llr_exact(&env_sw, &ch).expect("periods match"),
            ),
            (
                demod::llr_approx_csi(&env, &ch).expect("periods match"),
                demod::llr_approx_csi(&env_sw, &ch).expect("periods match"),
            ),
            (
                demod::llr_approx_scale_free(&env),
                demod::llr_approx_scale_free(&env_sw),
            ),
        ];
        for (which, (a, b)) in pairs.iter().enumerate() {
            for i in 0..a.len() {
                if a[i] != -b[i] {
                    return CheckOutcome::new(
                        "llr-antisymmetry",
                        false,
                        format!("metric {which} not antisymmetric at round {round}, period {i}"),
                    );
                }
            }
        }
    }
    CheckOutcome::new(
        "llr-antisymmetry",
        true,
        "exact/csi/scale-free negate exactly under half swap (100 frames)".into(),
    )
}

/// Positive scaling never changes the scale-free metric's signs nor the
/// decoded bits.
pub fn check_scale_free_decision_invariance() -> CheckOutcome {
    let code = ConvCode::default();
    let mut rng = RngStream::new(0x5e1f, 5).rng();
    for round in 0..50 {
        let info = BitVec::random(40, &mut rng);
        let coded = code.encode(&info);
        let chips = manchester::manchester_encode(&coded);
        let tx = manchester::synthesize(
            &chips,
            &WaveformConfig {
                samples_per_half_bit: 2,
                phase_mode: PhaseMode::Random,
            },
            RngStream::new(0x5e1f, 6).child(round),
        )
        .expect("valid chips");
        let (rx, _) = channel::apply(
            &tx,
            &ChannelConfig {
                kind: ChannelKind::Awgn,
                noise_power: 0.3,
                fading_block_periods: 1003,
            },
            RngStream::new(0x5e1f, 7).child(round),
        )
        .expect("valid channel");
        let env = demod::envelope(&rx);
        let scale = 0.01 + 50.0 * rng.random::<f64>();
        let scaled_env = demod::EnvelopeFrame::new(
            env.magnitudes().iter().map(|m| m * scale).collect(),
            env.samples_per_half_bit(),
        )
        .expect("valid frame");
        let base = demod::llr_approx_scale_free(&env);
        let scaled = demod::llr_approx_scale_free(&scaled_env);
        for i in 0..base.len() {
            if base[i] != 0.0 && base[i].signum() != scaled[i].signum() {
                return CheckOutcome::new(
                    "scale-free-decision-invariance",
                    false,
                    format!("sign flipped at round {round}, period {i}, c = {scale}"),
                );
            }
        }
        let a = code.viterbi_decode(&base).expect("valid length");
        let b = code.viterbi_decode(&scaled).expect("valid length");
        if a.decoded_bits != b.decoded_bits {
            return CheckOutcome::new(
                "scale-free-decision-invariance",
                false,
                format!("decoded bits changed under scaling at round {round}"),
            );
        }
    }
    CheckOutcome::new(
        "scale-free-decision-invariance",
        true,
        "signs and decoded bits invariant under positive scaling (50 frames)".into(),
    )
}

/// Noise and fading calibration: E|n|^2 within 1% of sigma^2 over 10^6
/// samples, E|h|^2 within 2% of 1 over 10^5 blocks.
pub fn check_channel_calibration() -> CheckOutcome {
    let n = 1_000_000usize;
    let silent = ComplexSampleFrame::new(vec![Complex64::new(0.0, 0.0); n], 1)
        .expect("even length");
    let sigma2 = 0.73;
    let (rx, _) = channel::apply(
        &silent,
        &ChannelConfig {
            kind: ChannelKind::Awgn,
            noise_power: sigma2,
            fading_block_periods: 1,
        },
        RngStream::new(0x5e1f, 8),
    )
    .expect("valid channel");
    let noise_ratio =
        rx.samples().iter().map(|s| s.norm_sqr()).sum::<f64>() / (n as f64 * sigma2);

    let periods = 100_000usize;
    let short = ComplexSampleFrame::new(vec![Complex64::new(0.0, 0.0); 2 * periods], 1)
        .expect("even length");
    let (_, realization) = channel::apply(
        &short,
        &ChannelConfig {
            kind: ChannelKind::BlockRayleigh,
            noise_power: 1.0,
            fading_block_periods: 1,
        },
        RngStream::new(0x5e1f, 9),
    )
    .expect("valid channel");
    let gain_ratio =
        realization.gains().iter().map(|h| h.norm_sqr()).sum::<f64>() / periods as f64;

    let ok = (0.99..=1.01).contains(&noise_ratio) && (0.98..=1.02).contains(&gain_ratio);
    CheckOutcome::new(
        "channel-calibration",
        ok,
        format!("E|n|^2/s2 = {noise_ratio:.4} (tol 1%), E|h|^2 = {gain_ratio:.4} (tol 2%)"),
    )
}

/// The noiseless end-to-end chain decodes without errors for every LLR
/// method, coded and uncoded, with and without interleaving.
pub fn check_noiseless_chain() -> CheckOutcome {
    let base = SimConfig {
        info_length: 200,
        snr_grid_db: vec![300.0],
        seed: 0x5e1f,
        ..SimConfig::default()
    };
    let mut cases: Vec<(String, SimConfig)> = Vec::new();
    for method in LlrMethod::ALL {
        cases.push((
            format!("coded/{method}"),
            SimConfig {
                llr_method: method,
                ..base.clone()
            },
        ));
        cases.push((
            format!("uncoded/{method}"),
            SimConfig {
                llr_method: method,
                coding_enabled: false,
                ..base.clone()
            },
        ));
    }
    cases.push((
        "coded/exact/interleaved".into(),
        SimConfig {
            interleaver_block_size: Some(7),
            ..base.clone()
        },
    ));
    for (label, cfg) in &cases {
        for trial in 0..3u64 {
            let out = sim::run_trial(cfg, 300.0, RngStream::new(cfg.seed, 0).child(trial))
                .expect("valid config");
            if out.bit_errors != 0 {
                return CheckOutcome::new(
                    "noiseless-chain",
                    false,
                    format!("{label}: {} bit errors in trial {trial}", out.bit_errors),
                );
            }
        }
    }
    CheckOutcome::new(
        "noiseless-chain",
        true,
        format!("{} configurations, 3 trials each, zero errors", cases.len()),
    )
}

/// One-worker and eight-worker sweeps produce identical statistics.
pub fn check_scheduling_invariance() -> CheckOutcome {
    let cfg = SimConfig {
        info_length: 100,
        snr_grid_db: vec![1.0, 4.0],
        stop: StopRule {
            max_trials: 400,
            min_bit_errors: 60,
            max_bits: 10_000_000,
        },
        seed: 0x5e1f,
        ..SimConfig::default()
    };
    let one = sim::run_sweep(&cfg, 1).expect("valid config");
    let eight = sim::run_sweep(&cfg, 8).expect("valid config");
    for (a, b) in one.iter().zip(eight.iter()) {
        let same = a.snr_db == b.snr_db
            && a.trials == b.trials
            && a.info_bits == b.info_bits
            && a.bit_errors == b.bit_errors
            && a.block_errors == b.block_errors
            && a.ber == b.ber
            && a.bler == b.bler
            && a.ber_ci95 == b.ber_ci95;
        if !same {
            return CheckOutcome::new(
                "scheduling-invariance",
                false,
                format!("1-worker and 8-worker sweeps differ at {} dB", a.snr_db),
            );
        }
    }
    CheckOutcome::new(
        "scheduling-invariance",
        true,
        format!(
            "bit-identical statistics across worker counts ({} points)",
            one.len()
        ),
    )
}
