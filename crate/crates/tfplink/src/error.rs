//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("bit sequence length {len} is not divisible by {bits_per_symbol} bits/symbol")]
    BitLength { len: usize, bits_per_symbol: usize },

    #[error("sequence length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("modulator drive out of range: |{value:.4}| > 1")]
    DriveOutOfRange { value: f64 },

    #[error("undersampled: {samples_per_symbol:.2} samples/symbol, need at least {min}")]
    Undersampled { samples_per_symbol: f64, min: usize },

    #[error("filter bandwidth {bandwidth_hz:.3e} Hz not representable at sample rate {sample_rate:.3e} Hz")]
    FilterBandwidth { bandwidth_hz: f64, sample_rate: f64 },

    #[error("superchannel bandwidth {occupied_hz:.3e} Hz exceeds sample rate {sample_rate:.3e} Hz")]
    Aliasing { occupied_hz: f64, sample_rate: f64 },

    #[error("waveform contains non-finite samples after {context}")]
    NonFinite { context: String },

    #[error("pulse energy {energy:.3e} too small to normalize")]
    PulseEnergy { energy: f64 },

    #[error("carrier index {index} outside plan with {n_carriers} carriers")]
    CarrierOutOfPlan { index: usize, n_carriers: usize },

    #[error("adaptive equalizer diverged: output power {output:.3e} vs target {target:.3e}")]
    FfeDiverged { output: f64, target: f64 },

    #[error("tap sequence is not positive semidefinite (min spectrum {min_spectrum:.3e})")]
    NonPsdTaps { min_spectrum: f64 },

    #[error("symbol {value} is not drawn from a square constellation")]
    NotSquareConstellation { value: String },

    #[error("noise level must be positive, got {n0:.3e}")]
    InvalidNoiseLevel { n0: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("parity-check file error: {0}")]
    Alist(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
