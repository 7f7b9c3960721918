//! Benchmark-only crate; see `benches/kernels.rs`. Shared input builders
//! live here so the bench targets stay small.

use ooksim_core::channel::{self, ChannelConfig, ChannelKind};
use ooksim_core::demod::{self, EnvelopeFrame};
use ooksim_core::manchester::{self, PhaseMode, WaveformConfig};
use ooksim_core::types::{BitVec, ChannelRealization, RngStream};

/// One received frame plus its realization: 1000 info bits through the
/// default coded chain at roughly the waterfall SNR.
pub fn received_frame(seed: u64) -> (EnvelopeFrame, ChannelRealization) {
    let stream = RngStream::new(seed, 0);
    let code = ooksim_core::convcode::ConvCode::default();
    let info = BitVec::random(1000, &mut stream.child(0).rng());
    let chips = manchester::manchester_encode(&code.encode(&info));
    let tx = manchester::synthesize(
        &chips,
        &WaveformConfig {
            samples_per_half_bit: 2,
            phase_mode: PhaseMode::Random,
        },
        stream.child(1),
    )
    .expect("valid chips");
    let (rx, realization) = channel::apply(
        &tx,
        &ChannelConfig {
            kind: ChannelKind::Awgn,
            noise_power: ooksim_core::snr_db_to_noise_power(4.0),
            fading_block_periods: 1003,
        },
        stream.child(2),
    )
    .expect("valid channel");
    (demod::envelope(&rx), realization)
}
