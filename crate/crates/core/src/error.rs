//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum PwmError {
    /// A configuration field violates its documented range.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// Sampling rate too low to resolve the fastest switching.
    #[error("sample rate {actual} Hz below required minimum {required} Hz")]
    UndersampledRate { actual: f64, required: f64 },

    /// DFT input does not span an integer number of fundamental periods.
    #[error("{count} samples at {rate} Hz span {periods} periods of f0 = {f0} Hz (not an integer)")]
    NonintegralPeriods {
        count: usize,
        rate: f64,
        f0: f64,
        periods: f64,
    },

    /// Ratio metric requested on a spectrum with no fundamental.
    #[error("zero fundamental magnitude; ratio metrics undefined")]
    ZeroFundamental,

    /// Modulator value outside [-1, 1]; the intersection angle is undefined.
    #[error("modulator value {value} outside [-1, 1]; intersection angle undefined")]
    OvermodulatedAlpha { value: f64 },
}
