//! Strategy configuration: which modulator, which carrier law, and the
//! operating point (fundamental frequency, average modulation order,
//! truncation parameter, DC bus).

use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::fmt;

use crate::error::PwmError;
use crate::modulation::{injected_modulator, sine_modulator, solve_amplitude};

/// Default harmonic-injection coefficients: fundamental plus 3rd and 9th.
pub const DEFAULT_INJECTION: [(u32, f64); 3] = [(1, 1.15), (3, -0.27), (9, -0.029)];

/// Truncation parameter upper limit. The carrier-law amplitude diverges as
/// k approaches 1, so the usable domain is capped below it.
pub const K_MAX: f64 = 0.95;

/// Modulation strategy. `HipwmFmtc3` with `k = 0` reproduces the plain
/// FM-carrier strategy (sinusoidal pulsation law, no frozen zones).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Sine modulator vs. fixed-frequency triangular carrier.
    Spwm,
    /// Harmonic-injection modulator vs. fixed-frequency carrier.
    HipwmFixed,
    /// Harmonic-injection modulator vs. frequency-modulated carrier with
    /// truncated squared-sinusoid pulsation law.
    HipwmFmtc3,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::Spwm => write!(f, "spwm"),
            Strategy::HipwmFixed => write!(f, "hipwm_fixed"),
            Strategy::HipwmFmtc3 => write!(f, "hipwm_fmtc3"),
        }
    }
}

/// Placement of the carrier-law active zones.
///
/// `Shifted` (default) uses the sin² pulsation law: switching is cancelled
/// around the modulator extremes (x = 0 and x = π), where the output is
/// clamped at ±E/2. `Literal` uses the cos² law as printed, which freezes
/// the carrier around x = π/2 and 3π/2 instead. Both share the same
/// amplitude/truncation constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CarrierVariant {
    Shifted,
    Literal,
}

impl fmt::Display for CarrierVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CarrierVariant::Shifted => write!(f, "shifted"),
            CarrierVariant::Literal => write!(f, "literal"),
        }
    }
}

/// Non-fatal conditions detected during validation or synthesis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Warning {
    /// Mean order is not an odd positive integer multiple of 3, so triplen
    /// cancellation and half-wave symmetry arguments may not apply.
    NonTripleOddOrder { mean_order: f64 },
    /// Mean order is not an integer; the waveform is not periodic at the
    /// modulator period and spectra computed over one period will leak.
    NonSynchronousOrder { mean_order: f64 },
    /// Modulator magnitude exceeded 1 somewhere (overmodulation).
    Clipping { peak: f64 },
    /// A frozen zone needed boundary edges at both ends: the midpoint
    /// clamp level disagrees with the comparator on entry and exit.
    FrozenZoneConflict { gap_index: usize, boundary_edges: usize },
    /// The modulator is (numerically) zero at a frozen-zone midpoint; the
    /// clamp level fell back to the comparator state at zone entry.
    DegenerateClampMidpoint { gap_index: usize },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::NonTripleOddOrder { mean_order } => {
                write!(f, "mean order {mean_order} is not an odd multiple of 3")
            }
            Warning::NonSynchronousOrder { mean_order } => {
                write!(f, "mean order {mean_order} is not an integer; modulation is not synchronized")
            }
            Warning::Clipping { peak } => {
                write!(f, "modulator peak {peak} exceeds 1 (overmodulation)")
            }
            Warning::FrozenZoneConflict { gap_index, boundary_edges } => write!(
                f,
                "frozen zone {gap_index}: clamp disagrees with comparator ({boundary_edges} boundary edges)"
            ),
            Warning::DegenerateClampMidpoint { gap_index } => write!(
                f,
                "frozen zone {gap_index}: modulator is zero at midpoint; clamp taken from zone entry"
            ),
        }
    }
}

/// Full description of one modulation setup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyConfig {
    pub strategy: Strategy,
    /// Modulator fundamental frequency, Hz.
    pub f_m: f64,
    /// Average modulation order: carrier periods per modulator period.
    pub mean_order: f64,
    /// Truncation parameter, in [0, 0.95]. Ignored for fixed-carrier
    /// strategies.
    pub k: f64,
    /// DC bus voltage; output levels are ±bus_e/2.
    pub bus_e: f64,
    /// Harmonic-injection list as (harmonic index, coefficient) pairs.
    /// Used by the HIPWM strategies; SPWM uses a plain cosine.
    pub injection: Vec<(u32, f64)>,
    pub carrier_variant: CarrierVariant,
    /// Modulation depth scaling in [0, 1] applied to the modulator.
    pub amplitude_index: f64,
}

impl StrategyConfig {
    /// The proposed strategy at its published operating point
    /// (k = 0.5, mean order 15), at the given fundamental and bus voltage.
    pub fn fmtc3(f_m: f64, mean_order: f64, k: f64, bus_e: f64) -> Self {
        StrategyConfig {
            strategy: Strategy::HipwmFmtc3,
            f_m,
            mean_order,
            k,
            bus_e,
            injection: DEFAULT_INJECTION.to_vec(),
            carrier_variant: CarrierVariant::Shifted,
            amplitude_index: 1.0,
        }
    }

    /// SPWM baseline: sine modulator, fixed carrier ratio `order`.
    pub fn spwm(f_m: f64, order: f64, amplitude_index: f64, bus_e: f64) -> Self {
        StrategyConfig {
            strategy: Strategy::Spwm,
            f_m,
            mean_order: order,
            k: 0.0,
            bus_e,
            injection: Vec::new(),
            carrier_variant: CarrierVariant::Shifted,
            amplitude_index,
        }
    }

    /// Harmonic-injection modulator against a fixed-frequency carrier.
    pub fn hipwm_fixed(f_m: f64, order: f64, bus_e: f64) -> Self {
        StrategyConfig {
            strategy: Strategy::HipwmFixed,
            injection: DEFAULT_INJECTION.to_vec(),
            ..StrategyConfig::spwm(f_m, order, 1.0, bus_e)
        }
    }

    /// Modulator angular frequency ω_m, rad/s.
    pub fn omega_m(&self) -> f64 {
        TAU * self.f_m
    }

    /// Modulator period, s.
    pub fn period(&self) -> f64 {
        1.0 / self.f_m
    }

    /// Modulator value at modulator phase `x` (rad).
    pub fn modulator(&self, x: f64) -> f64 {
        match self.strategy {
            Strategy::Spwm => sine_modulator(x, self.amplitude_index),
            Strategy::HipwmFixed | Strategy::HipwmFmtc3 => {
                injected_modulator(x, &self.injection, self.amplitude_index)
            }
        }
    }

    /// Peak instantaneous carrier frequency as a multiple of f_m:
    /// A(1−k)/ω_m for the FM carrier, the carrier ratio otherwise.
    pub fn max_carrier_order(&self) -> Result<f64, PwmError> {
        match self.strategy {
            Strategy::Spwm | Strategy::HipwmFixed => Ok(self.mean_order),
            Strategy::HipwmFmtc3 => {
                Ok(solve_amplitude(self.k, self.mean_order)? * (1.0 - self.k))
            }
        }
    }

    /// Default harmonic count for spectra: four times the peak carrier
    /// order, covering the first carrier clusters and their side bands.
    pub fn default_n_max(&self) -> Result<usize, PwmError> {
        Ok((4.0 * self.max_carrier_order()?).ceil() as usize)
    }

    /// Range checks. Returns advisory warnings for conditions that do not
    /// prevent synthesis.
    pub fn validate(&self) -> Result<Vec<Warning>, PwmError> {
        if !self.f_m.is_finite() || self.f_m <= 0.0 {
            return Err(PwmError::InvalidConfig(format!(
                "f_m must be positive, got {}",
                self.f_m
            )));
        }
        if !self.bus_e.is_finite() || self.bus_e <= 0.0 {
            return Err(PwmError::InvalidConfig(format!(
                "bus_e must be positive, got {}",
                self.bus_e
            )));
        }
        if !(0.0..=K_MAX).contains(&self.k) {
            return Err(PwmError::InvalidConfig(format!(
                "k must lie in [0, {K_MAX}], got {}",
                self.k
            )));
        }
        if !self.mean_order.is_finite() || self.mean_order < 3.0 {
            return Err(PwmError::InvalidConfig(format!(
                "mean_order must be at least 3, got {}",
                self.mean_order
            )));
        }
        if !(0.0..=1.0).contains(&self.amplitude_index) {
            return Err(PwmError::InvalidConfig(format!(
                "amplitude_index must lie in [0, 1], got {}",
                self.amplitude_index
            )));
        }
        for &(h, _) in &self.injection {
            if h == 0 {
                return Err(PwmError::InvalidConfig(
                    "injection harmonic index must be >= 1".into(),
                ));
            }
        }

        let mut warnings = Vec::new();
        let rounded = self.mean_order.round();
        if (self.mean_order - rounded).abs() > 1e-9 {
            warnings.push(Warning::NonSynchronousOrder {
                mean_order: self.mean_order,
            });
        } else if self.strategy != Strategy::Spwm {
            let m = rounded as i64;
            // odd positive integer multiple of 3: 3, 9, 15, 21, ...
            if m % 3 != 0 || (m / 3) % 2 == 0 {
                warnings.push(Warning::NonTripleOddOrder {
                    mean_order: self.mean_order,
                });
            }
        }
        Ok(warnings)
    }
}
