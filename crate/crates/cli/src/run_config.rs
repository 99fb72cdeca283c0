//! File-backed run configuration: a JSON mirror of the strategy setup plus
//! output and analysis options. Unknown keys are rejected so typos fail
//! loudly instead of silently falling back to defaults.

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use pwm_forge_core::config::{CarrierVariant, Strategy, StrategyConfig, DEFAULT_INJECTION};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub strategy: Strategy,
    pub f_m: f64,
    pub mean_order: f64,
    pub k: f64,
    pub bus_e: f64,
    pub injection: Vec<(u32, f64)>,
    pub carrier_variant: CarrierVariant,
    pub amplitude_index: f64,
    /// Harmonic count for spectra; None picks the per-config default.
    pub n_max: Option<usize>,
    /// ZOH sampling rate for the DFT oracle path, Hz.
    pub sample_rate: Option<f64>,
    /// Frequency bands (f_lo, f_hi) in Hz for band-energy metrics and the
    /// avoid subcommand.
    pub bands: Vec<(f64, f64)>,
    /// Sweep grid over k; defaults to 0, 0.1, …, 0.9.
    pub k_values: Vec<f64>,
    /// Sweep grid over the mean order; defaults to [mean_order].
    pub m_values: Vec<f64>,
    /// Search range for the avoid subcommand.
    pub k_range: (f64, f64),
    /// Evaluation budget for the avoid subcommand.
    pub budget: usize,
    pub out_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            strategy: Strategy::HipwmFmtc3,
            f_m: 50.0,
            mean_order: 15.0,
            k: 0.5,
            bus_e: 400.0,
            injection: DEFAULT_INJECTION.to_vec(),
            carrier_variant: CarrierVariant::Shifted,
            amplitude_index: 1.0,
            n_max: None,
            sample_rate: None,
            bands: Vec::new(),
            k_values: (0..10).map(|i| i as f64 * 0.1).collect(),
            m_values: Vec::new(),
            k_range: (0.0, 0.9),
            budget: 32,
            out_dir: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        serde_json::from_str(&text)
            .map_err(|e| format!("cannot parse config {}: {e}", path.display()))
    }

    /// The strategy part of the run configuration.
    pub fn strategy_config(&self) -> StrategyConfig {
        StrategyConfig {
            strategy: self.strategy,
            f_m: self.f_m,
            mean_order: self.mean_order,
            k: self.k,
            bus_e: self.bus_e,
            injection: match self.strategy {
                Strategy::Spwm => Vec::new(),
                _ => self.injection.clone(),
            },
            carrier_variant: self.carrier_variant,
            amplitude_index: self.amplitude_index,
        }
    }

    /// Grid for the sweep subcommand.
    pub fn sweep_m_values(&self) -> Vec<f64> {
        if self.m_values.is_empty() {
            vec![self.mean_order]
        } else {
            self.m_values.clone()
        }
    }
}
