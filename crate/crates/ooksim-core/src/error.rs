//! Error type shared by all modules of the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Structural and domain errors raised by the simulation primitives.
#[derive(Debug, Error)]
pub enum Error {
    #[error("bit value {value} at index {index} is not 0 or 1")]
    InvalidBit { index: usize, value: u8 },

    #[error("LLR value at index {index} is not finite")]
    NonFiniteLlr { index: usize },

    #[error("frame of {len} samples is not a whole number of {period}-sample bit periods")]
    BadFrameLength { len: usize, period: usize },

    #[error("samples per half bit must be >= 1")]
    BadSamplesPerHalfBit,

    #[error("noise power must be positive and finite, got {0}")]
    BadNoisePower(f64),

    #[error("envelope magnitude at index {index} must be finite and >= 0")]
    BadMagnitude { index: usize },

    #[error("invalid generator pair ({g1:#o}, {g2:#o}): {reason}")]
    BadGenerators { g1: u32, g2: u32, reason: &'static str },

    #[error("cannot parse {0:?} as an octal generator pair like \"15,13\"")]
    BadGeneratorString(String),

    #[error(
        "LLR length {len} is not a valid rate-1/2 zero-terminated codeword length \
         (need an even length of at least {min})"
    )]
    BadCodewordLength { len: usize, min: usize },

    #[error("invalid Manchester chip pair ({0}, {1}) at period {2}")]
    BadChipPair(u8, u8, usize),

    #[error("envelope has {env} periods but channel realization has {channel} gains")]
    PeriodMismatch { env: usize, channel: usize },

    #[error("log_bessel_i0: argument must be finite and >= 0, got {0}")]
    BesselDomain(f64),

    #[error("log_bessel_i0_oracle: argument {0} outside the supported range [0, 700]")]
    BesselOracleRange(f64),

    #[error("interleaver block size must be >= 1")]
    BadInterleaverBlock,

    #[error("sequence length {got} does not match interleaver total length {want}")]
    InterleaveLength { got: usize, want: usize },

    #[error("PSD segment length must be >= 8, got {0}")]
    BadSegmentLength(usize),

    #[error("PSD overlap fraction must be in [0, 1), got {0}")]
    BadOverlap(f64),

    #[error("frame of {len} samples is shorter than PSD segment length {segment}")]
    FrameTooShort { len: usize, segment: usize },

    #[error("spectral flatness: PSD bin {index} is not positive")]
    NonPositiveBin { index: usize },

    #[error("level {level:e} is not bracketed by the {metric} curve")]
    LevelNotBracketed { level: f64, metric: &'static str },

    #[error("invalid simulation config: {0}")]
    BadConfig(String),

    #[error("worker pool: {0}")]
    WorkerPool(String),
}
