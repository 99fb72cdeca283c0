//! Closed-form reconstruction of the output voltage: the quasi-static
//! harmonic series driven by the intersection angle α, evaluated with the
//! accumulated carrier phase, plus the Bessel sideband predictor.
//!
//! Per carrier cycle the output is a square pulse of half-width
//! α = π/2·(1 + H) centered where the carrier phase is ≡ 0 (mod 2π); its
//! Fourier coefficients are (4/nπ)(E/2)·sin(nα), with the mean
//! (E/2)(2α/π − 1). Treating α as slowly varying and substituting the
//! carrier phase for the pulse train's angle gives the analytic voltage.
//! Expanding cos(n·θ) with the FM phase via the Jacobi–Anger identity
//! predicts side bands at n·A(1/2 − k)/2π ± 2j·f_m weighted by
//! J_j(n·A/4ω_m). Both are approximations where the envelope varies
//! quickly; they are validated structurally against the exact spectrum.

use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::io::{self, Write};

use crate::bessel::bessel_j_table;
use crate::config::StrategyConfig;
use crate::error::PwmError;
use crate::modulation::{build_carrier_law, carrier_theta, injected_modulator, CarrierLaw};
use crate::sigfmt::fmt_sci;

/// Truncated analytic voltage series for one FM-carrier setup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticSeries {
    /// Carrier-harmonic truncation of the series.
    pub n_terms: usize,
    pub law: CarrierLaw,
    /// Injection list with the amplitude index already folded in.
    pub injection: Vec<(u32, f64)>,
    pub bus_e: f64,
    pub omega_m: f64,
}

impl AnalyticSeries {
    pub fn from_config(config: &StrategyConfig, n_terms: usize) -> Result<Self, PwmError> {
        if n_terms < 1 {
            return Err(PwmError::InvalidConfig(
                "analytic series needs at least one carrier harmonic".into(),
            ));
        }
        let law = build_carrier_law(config)?;
        let injection = config
            .injection
            .iter()
            .map(|&(h, c)| (h, c * config.amplitude_index))
            .collect();
        Ok(AnalyticSeries {
            n_terms,
            law,
            injection,
            bus_e: config.bus_e,
            omega_m: config.omega_m(),
        })
    }

    fn modulator(&self, x: f64) -> f64 {
        injected_modulator(x, &self.injection, 1.0)
    }
}

/// Intersection angle α = π/2 + (π/2)·H(x) of the modulator with the
/// per-cycle pulse-width law.
pub fn alpha_of(x: f64, injection: &[(u32, f64)]) -> Result<f64, PwmError> {
    let h = injected_modulator(x, injection, 1.0);
    if h.abs() > 1.0 + 1e-12 {
        return Err(PwmError::OvermodulatedAlpha { value: h });
    }
    Ok(FRAC_PI_2 + FRAC_PI_2 * h.clamp(-1.0, 1.0))
}

/// Quasi-static cosine coefficient (4/nπ)(E/2)·sin(nα) of the square
/// pulse with half-width α.
pub fn quasi_static_coefficient(n: u32, alpha: f64, bus_e: f64) -> f64 {
    assert!(n >= 1, "harmonics are 1-based");
    4.0 / (n as f64 * PI) * (bus_e / 2.0) * (n as f64 * alpha).sin()
}

/// Companion mean term (E/2)(2α/π − 1).
pub fn quasi_static_dc(alpha: f64, bus_e: f64) -> f64 {
    bus_e / 2.0 * (2.0 * alpha / PI - 1.0)
}

/// Analytic phase-neutral voltage at time `t`. Inside frozen zones the
/// output is the clamped level; elsewhere it is the modulator term plus
/// the truncated carrier-harmonic series evaluated at the accumulated
/// carrier phase.
pub fn analytic_voltage(t: f64, series: &AnalyticSeries) -> f64 {
    let e2 = series.bus_e / 2.0;
    let x = (series.omega_m * t).rem_euclid(TAU);
    for gap in series.law.gaps() {
        if gap.contains(x) {
            let h_mid = series.modulator(gap.midpoint());
            return if h_mid >= 0.0 { e2 } else { -e2 };
        }
    }
    let h = series.modulator(x);
    let theta = carrier_theta(t, &series.law, series.omega_m);
    let mut v = e2 * h;
    for n in 1..=series.n_terms {
        let nf = n as f64;
        v += 4.0 / PI * e2 / nf * (nf * FRAC_PI_2 * (1.0 + h)).sin() * (nf * theta).cos();
    }
    v
}

/// Average of the modulator over the first active zone; the sideband
/// envelope treats the pulse-width law as constant at this value.
pub fn zone_average_modulator(law: &CarrierLaw, injection: &[(u32, f64)]) -> f64 {
    let z = &law.zones[0];
    let width = z.end - z.start;
    injection
        .iter()
        .map(|&(h, c)| {
            let hf = h as f64;
            c * ((hf * z.end).sin() - (hf * z.start).sin()) / (hf * width)
        })
        .sum()
}

/// One predicted sideband of carrier harmonic `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SidebandLine {
    /// Carrier harmonic index.
    pub n: u32,
    /// Sideband index; lines sit at the cluster center + 2j·f_m.
    pub j: i32,
    /// Folded (non-negative) frequency, Hz.
    pub f_hz: f64,
    /// Predicted magnitude |J_j(z)|·envelope, volts.
    pub magnitude: f64,
}

/// Jacobi–Anger sideband table: for each carrier harmonic n ≤ N_terms,
/// lines at n·A(1/2 − k)/2π + 2j·f_m (folded to positive frequencies)
/// with weights J_j(n·A/4ω_m) under the zone-averaged envelope.
pub fn bessel_sideband_table(series: &AnalyticSeries, j_max: usize) -> Vec<SidebandLine> {
    let f_m = series.omega_m / TAU;
    let a = series.law.a_over_wm;
    let k = series.law.k;
    let h_bar = zone_average_modulator(&series.law, &series.injection);
    let mut out = Vec::with_capacity(series.n_terms * (2 * j_max + 1));
    for n in 1..=series.n_terms {
        let nf = n as f64;
        let z = nf * a / 4.0;
        let weights = bessel_j_table(z, j_max);
        let center_hz = nf * a * (0.5 - k) * f_m;
        let envelope = 4.0 / (nf * PI) * (series.bus_e / 2.0)
            * (nf * FRAC_PI_2 * (1.0 + h_bar)).sin().abs();
        for j in -(j_max as i32)..=(j_max as i32) {
            out.push(SidebandLine {
                n: n as u32,
                j,
                f_hz: (center_hz + 2.0 * j as f64 * f_m).abs(),
                magnitude: weights[j.unsigned_abs() as usize].abs() * envelope,
            });
        }
    }
    out
}

/// Sideband CSV: `n,j,f_hz,magnitude`, 12 significant digits.
pub fn write_sideband_csv<W: Write>(lines: &[SidebandLine], mut w: W) -> io::Result<()> {
    w.write_all(b"n,j,f_hz,magnitude\n")?;
    for l in lines {
        writeln!(
            w,
            "{},{},{},{}",
            l.n,
            l.j,
            fmt_sci(l.f_hz, 12),
            fmt_sci(l.magnitude, 12)
        )?;
    }
    Ok(())
}
