//! Python bindings: the strategy config, switched waveform, spectrum and
//! tuner exposed as a `pwm_forge` extension module. Python drives the Rust
//! pipeline in-process; nothing is recomputed on the Python side.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use pwm_forge_core::analytic::{bessel_sideband_table, AnalyticSeries};
use pwm_forge_core::bessel;
use pwm_forge_core::config::{CarrierVariant, Strategy, StrategyConfig};
use pwm_forge_core::error::PwmError;
use pwm_forge_core::modulation;
use pwm_forge_core::spectrum::{
    band_energy, dft_spectrum, fourier_from_edges, line_line, Spectrum,
};
use pwm_forge_core::synthesis::{sample, synthesize, SwitchedWaveform};
use pwm_forge_core::tuner;

fn to_py_err(e: PwmError) -> PyErr {
    match e {
        PwmError::InvalidConfig(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn parse_strategy(name: &str) -> PyResult<Strategy> {
    match name.to_lowercase().as_str() {
        "spwm" => Ok(Strategy::Spwm),
        "hipwm_fixed" => Ok(Strategy::HipwmFixed),
        "hipwm_fmtc3" => Ok(Strategy::HipwmFmtc3),
        _ => Err(PyValueError::new_err(format!(
            "unknown strategy {name:?}; expected spwm, hipwm_fixed or hipwm_fmtc3"
        ))),
    }
}

type ZoneSpans = Vec<(f64, f64)>;

fn parse_variant(name: &str) -> PyResult<CarrierVariant> {
    match name.to_lowercase().as_str() {
        "shifted" => Ok(CarrierVariant::Shifted),
        "literal" => Ok(CarrierVariant::Literal),
        _ => Err(PyValueError::new_err(format!(
            "unknown carrier variant {name:?}; expected shifted or literal"
        ))),
    }
}

/// One modulation setup: strategy, operating point and injection list.
#[pyclass(name = "StrategyConfig", skip_from_py_object)]
#[derive(Clone)]
struct PyStrategyConfig {
    inner: StrategyConfig,
}

#[pymethods]
impl PyStrategyConfig {
    #[new]
    #[pyo3(signature = (strategy="hipwm_fmtc3", f_m=50.0, mean_order=15.0, k=0.5,
                        bus_e=400.0, variant="shifted", amplitude_index=1.0,
                        injection=None))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        strategy: &str,
        f_m: f64,
        mean_order: f64,
        k: f64,
        bus_e: f64,
        variant: &str,
        amplitude_index: f64,
        injection: Option<Vec<(u32, f64)>>,
    ) -> PyResult<Self> {
        let strategy = parse_strategy(strategy)?;
        let mut cfg = match strategy {
            Strategy::Spwm => StrategyConfig::spwm(f_m, mean_order, amplitude_index, bus_e),
            Strategy::HipwmFixed => StrategyConfig::hipwm_fixed(f_m, mean_order, bus_e),
            Strategy::HipwmFmtc3 => StrategyConfig::fmtc3(f_m, mean_order, k, bus_e),
        };
        cfg.k = k;
        cfg.amplitude_index = amplitude_index;
        cfg.carrier_variant = parse_variant(variant)?;
        if let Some(inj) = injection {
            cfg.injection = inj;
        }
        cfg.validate().map_err(to_py_err)?;
        Ok(PyStrategyConfig { inner: cfg })
    }

    #[getter]
    fn k(&self) -> f64 {
        self.inner.k
    }

    #[getter]
    fn mean_order(&self) -> f64 {
        self.inner.mean_order
    }

    #[getter]
    fn f_m(&self) -> f64 {
        self.inner.f_m
    }

    #[getter]
    fn bus_e(&self) -> f64 {
        self.inner.bus_e
    }

    /// Validation warnings as strings (empty when clean).
    fn warnings(&self) -> PyResult<Vec<String>> {
        Ok(self
            .inner
            .validate()
            .map_err(to_py_err)?
            .iter()
            .map(|w| w.to_string())
            .collect())
    }

    /// Closed-form carrier solution: (A/ω_m, excursion, zone boundaries).
    fn solve(&self) -> PyResult<(f64, f64, ZoneSpans)> {
        let law = modulation::build_carrier_law(&self.inner).map_err(to_py_err)?;
        Ok((
            law.a_over_wm,
            law.excursion(),
            law.zones.iter().map(|z| (z.start, z.end)).collect(),
        ))
    }

    /// Locate every switching edge over one modulator period.
    fn synthesize(&self) -> PyResult<PyWaveform> {
        Ok(PyWaveform {
            inner: synthesize(&self.inner).map_err(to_py_err)?,
        })
    }

    /// Truncated quasi-static voltage series for this setup.
    fn analytic_series(&self, n_terms: usize) -> PyResult<PyAnalyticSeries> {
        Ok(PyAnalyticSeries {
            inner: AnalyticSeries::from_config(&self.inner, n_terms).map_err(to_py_err)?,
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "StrategyConfig(strategy={}, f_m={}, mean_order={}, k={}, bus_e={})",
            self.inner.strategy,
            self.inner.f_m,
            self.inner.mean_order,
            self.inner.k,
            self.inner.bus_e
        )
    }
}

/// Exact switched waveform: ordered edge list over one period.
#[pyclass(name = "Waveform")]
struct PyWaveform {
    inner: SwitchedWaveform,
}

#[pymethods]
impl PyWaveform {
    #[getter]
    fn period(&self) -> f64 {
        self.inner.period
    }

    #[getter]
    fn initial_level(&self) -> f64 {
        self.inner.initial_level
    }

    fn edge_count(&self) -> usize {
        self.inner.edge_count()
    }

    /// Edges as (time_s, new_level_v) tuples.
    fn edges(&self) -> Vec<(f64, f64)> {
        self.inner.edges.iter().map(|e| (e.time, e.level)).collect()
    }

    fn level_at(&self, t: f64) -> f64 {
        self.inner.level_at(t)
    }

    /// Zero-order-hold sampling at `sample_rate` Hz over `n_periods`.
    #[pyo3(signature = (sample_rate, n_periods=1))]
    fn sample(&self, sample_rate: f64, n_periods: usize) -> PyResult<Vec<f64>> {
        sample(&self.inner, sample_rate, n_periods).map_err(to_py_err)
    }

    /// Exact Fourier table; `n_max=None` picks the per-config default.
    #[pyo3(signature = (n_max=None))]
    fn spectrum(&self, n_max: Option<usize>) -> PyResult<PySpectrum> {
        let n = match n_max {
            Some(n) => n,
            None => self.inner.meta.config.default_n_max().map_err(to_py_err)?,
        };
        Ok(PySpectrum {
            inner: fourier_from_edges(&self.inner, n),
        })
    }

    /// V_AB(t) = V_A(t) − V_A(t − shift), shift in modulator phase rad.
    #[pyo3(signature = (phase_shift=std::f64::consts::TAU / 3.0))]
    fn line_line(&self, phase_shift: f64) -> PyWaveform {
        PyWaveform {
            inner: line_line(&self.inner, phase_shift),
        }
    }

    fn warnings(&self) -> Vec<String> {
        self.inner
            .meta
            .warnings
            .iter()
            .map(|w| w.to_string())
            .collect()
    }

    fn edges_csv(&self) -> String {
        self.inner.edges_csv_string()
    }

    fn __repr__(&self) -> String {
        format!(
            "Waveform(period={}, edges={}, levels=({}, {}))",
            self.inner.period,
            self.inner.edge_count(),
            self.inner.levels.0,
            self.inner.levels.1
        )
    }
}

/// Harmonic table over the modulator fundamental.
#[pyclass(name = "Spectrum")]
struct PySpectrum {
    inner: Spectrum,
}

#[pymethods]
impl PySpectrum {
    #[getter]
    fn f0(&self) -> f64 {
        self.inner.f0
    }

    #[getter]
    fn dc(&self) -> f64 {
        self.inner.dc
    }

    fn n_max(&self) -> usize {
        self.inner.lines.len()
    }

    /// Magnitude of harmonic n (1-based).
    fn magnitude(&self, n: usize) -> PyResult<f64> {
        if n < 1 || n > self.inner.lines.len() {
            return Err(PyValueError::new_err(format!(
                "harmonic {n} outside 1..={}",
                self.inner.lines.len()
            )));
        }
        Ok(self.inner.magnitude(n))
    }

    fn magnitudes(&self) -> Vec<f64> {
        self.inner.lines.iter().map(|l| l.magnitude).collect()
    }

    /// (a_n, b_n) coefficients of harmonic n.
    fn coefficients(&self, n: usize) -> PyResult<(f64, f64)> {
        if n < 1 || n > self.inner.lines.len() {
            return Err(PyValueError::new_err(format!(
                "harmonic {n} outside 1..={}",
                self.inner.lines.len()
            )));
        }
        let l = &self.inner.lines[n - 1];
        Ok((l.a, l.b))
    }

    #[pyo3(signature = (n_max=None))]
    fn thd(&self, n_max: Option<usize>) -> PyResult<f64> {
        pwm_forge_core::spectrum::thd(&self.inner, n_max.unwrap_or(self.inner.lines.len()))
            .map_err(to_py_err)
    }

    #[pyo3(signature = (n_max=None))]
    fn wthd(&self, n_max: Option<usize>) -> PyResult<f64> {
        pwm_forge_core::spectrum::wthd(&self.inner, n_max.unwrap_or(self.inner.lines.len()))
            .map_err(to_py_err)
    }

    #[pyo3(signature = (n_max=None))]
    fn df(&self, n_max: Option<usize>) -> PyResult<f64> {
        pwm_forge_core::spectrum::df(&self.inner, n_max.unwrap_or(self.inner.lines.len()))
            .map_err(to_py_err)
    }

    /// Spectral energy per (f_lo, f_hi) band, V².
    fn band_energy(&self, bands: Vec<(f64, f64)>) -> Vec<f64> {
        band_energy(&self.inner, &bands)
    }

    fn total_power(&self) -> f64 {
        self.inner.total_power()
    }

    fn csv(&self) -> String {
        self.inner.csv_string()
    }

    fn __repr__(&self) -> String {
        format!(
            "Spectrum(f0={}, n_max={}, fundamental={:.4})",
            self.inner.f0,
            self.inner.lines.len(),
            self.inner.lines.first().map_or(0.0, |l| l.magnitude)
        )
    }
}

/// Quasi-static voltage series with the FM carrier phase.
#[pyclass(name = "AnalyticSeries")]
struct PyAnalyticSeries {
    inner: AnalyticSeries,
}

#[pymethods]
impl PyAnalyticSeries {
    /// Analytic phase-neutral voltage at time t.
    fn voltage(&self, t: f64) -> f64 {
        pwm_forge_core::analytic::analytic_voltage(t, &self.inner)
    }

    /// Jacobi–Anger sideband predictions as (n, j, f_hz, magnitude).
    fn sideband_table(&self, j_max: usize) -> Vec<(u32, i32, f64, f64)> {
        bessel_sideband_table(&self.inner, j_max)
            .iter()
            .map(|l| (l.n, l.j, l.f_hz, l.magnitude))
            .collect()
    }
}

/// Result of the band-energy minimization over k.
#[pyclass(name = "BandSearch")]
struct PyBandSearch {
    #[pyo3(get)]
    k_best: f64,
    #[pyo3(get)]
    objective: f64,
    #[pyo3(get)]
    plateau: bool,
    #[pyo3(get)]
    evaluations: Vec<(f64, f64)>,
    #[pyo3(get)]
    thd: f64,
}

/// Carrier-law amplitude A/ω_m for (k, mean order).
#[pyfunction]
fn solve_amplitude(k: f64, mean_order: f64) -> PyResult<f64> {
    modulation::solve_amplitude(k, mean_order).map_err(to_py_err)
}

/// Average modulation order produced by A/ω_m at truncation k.
#[pyfunction]
fn average_order(a_over_wm: f64, k: f64) -> f64 {
    modulation::average_order(a_over_wm, k)
}

/// J₀(z)..J_{j_max}(z).
#[pyfunction]
fn bessel_j_table(z: f64, j_max: usize) -> Vec<f64> {
    bessel::bessel_j_table(z, j_max)
}

/// DFT over uniform samples spanning an integer number of f0 periods.
#[pyfunction]
fn dft(samples: Vec<f64>, f0: f64, sample_rate: f64, n_max: usize) -> PyResult<PySpectrum> {
    Ok(PySpectrum {
        inner: dft_spectrum(&samples, f0, sample_rate, n_max).map_err(to_py_err)?,
    })
}

/// Metrics over a (k, mean-order) grid, returned as the sweep CSV text.
#[pyfunction]
#[pyo3(signature = (config, k_values, m_values=None, n_max=None, bands=None))]
fn sweep_csv(
    config: &PyStrategyConfig,
    k_values: Vec<f64>,
    m_values: Option<Vec<f64>>,
    n_max: Option<usize>,
    bands: Option<Vec<(f64, f64)>>,
) -> String {
    let ms = m_values.unwrap_or_else(|| vec![config.inner.mean_order]);
    tuner::sweep(
        &config.inner,
        &k_values,
        &ms,
        n_max,
        &bands.unwrap_or_default(),
    )
    .csv_string()
}

/// Search k minimizing spectral energy inside the given bands.
#[pyfunction]
#[pyo3(signature = (config, bands, k_range=(0.0, 0.9), budget=32))]
fn minimize_band_energy(
    config: &PyStrategyConfig,
    bands: Vec<(f64, f64)>,
    k_range: (f64, f64),
    budget: usize,
) -> PyResult<PyBandSearch> {
    let s = tuner::minimize_band_energy(&config.inner, &bands, k_range, budget)
        .map_err(to_py_err)?;
    Ok(PyBandSearch {
        k_best: s.k_best,
        objective: s.objective,
        plateau: s.plateau,
        evaluations: s.evaluations,
        thd: s.metrics.thd,
    })
}

#[pymodule]
fn pwm_forge(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyStrategyConfig>()?;
    m.add_class::<PyWaveform>()?;
    m.add_class::<PySpectrum>()?;
    m.add_class::<PyAnalyticSeries>()?;
    m.add_class::<PyBandSearch>()?;
    m.add_function(wrap_pyfunction!(solve_amplitude, m)?)?;
    m.add_function(wrap_pyfunction!(average_order, m)?)?;
    m.add_function(wrap_pyfunction!(bessel_j_table, m)?)?;
    m.add_function(wrap_pyfunction!(dft, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_csv, m)?)?;
    m.add_function(wrap_pyfunction!(minimize_band_energy, m)?)?;
    Ok(())
}
