//! Desk-scale synthesizer and spectral analyzer for carrier-based PWM
//! strategies built around a frequency-modulated triangular carrier with a
//! truncated-squared-sinusoid pulsation law (HIPWM-FMTC3), alongside SPWM
//! and fixed-carrier harmonic-injection baselines.
//!
//! The pipeline is exact where the signals allow it: switching edges are
//! located by bracketing and bisection, spectra are computed in closed form
//! from the edge list (the waveform is piecewise constant, so no windowing
//! or leakage is involved), and a sampled-DFT path exists purely as an
//! independent cross-check.
//!
//! Modules:
//! - [`config`]: strategy descriptions and validation
//! - [`modulation`]: modulator signals, the carrier pulsation law, the
//!   amplitude/truncation constraint and the closed-form carrier phase
//! - [`synthesis`]: comparator-based edge synthesis and sampling
//! - [`spectrum`]: exact Fourier coefficients, DFT oracle, THD/WTHD/DF,
//!   band energies and the three-phase line-line combination
//! - [`analytic`]: quasi-static voltage series and the Bessel sideband
//!   predictor
//! - [`tuner`]: parameter sweeps and band-energy minimization

pub mod analytic;
pub mod bessel;
pub mod config;
pub mod error;
pub mod modulation;
pub mod sigfmt;
pub mod spectrum;
pub mod synthesis;
pub mod tuner;

pub use config::{CarrierVariant, Strategy, StrategyConfig, Warning, DEFAULT_INJECTION};
pub use error::PwmError;
pub use modulation::{
    average_order, build_carrier_law, carrier_theta, injected_modulator,
    instantaneous_pulsation, sine_modulator, solve_amplitude, CarrierLaw, Zone,
};
pub use spectrum::{
    band_energy, df, dft_spectrum, fourier_from_edges, line_line, metrics_report, thd, wthd,
    MetricsReport, SpectralLine, Spectrum,
};
pub use synthesis::{sample, spwm_reference, synthesize, triangle, Edge, SwitchedWaveform};
