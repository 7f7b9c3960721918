//! Link-level simulation of Manchester-coded on-off keying with a
//! noncoherent envelope-detecting receiver.
//!
//! The crate covers the full chain: rate-1/2 convolutional coding, optional
//! rectangular interleaving, Manchester chip mapping, random-phase OOK
//! waveform synthesis, AWGN and block-Rayleigh channels, envelope detection
//! with exact and approximate per-bit LLRs, soft-input Viterbi decoding,
//! reproducible parallel Monte-Carlo BER/BLER sweeps, and Welch PSD
//! estimation of the transmit waveform.

pub mod channel;
pub mod convcode;
pub mod demod;
pub mod error;
pub mod interleave;
pub mod manchester;
pub mod selftest;
pub mod sim;
pub mod spectral;
pub mod types;

pub use error::{Error, Result};
pub use types::{
    noise_power_to_snr_db, snr_db_to_noise_power, BitVec, ChannelRealization,
    ComplexSampleFrame, LlrVec, RngStream, RNG_ALGORITHM,
};
