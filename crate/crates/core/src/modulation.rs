//! Modulator signals and the frequency-modulated carrier law.
//!
//! The carrier's instantaneous pulsation is A·(cos²(ω_m t) − k) truncated at
//! zero (the `Literal` placement) or the quarter-period-shifted sin² form
//! (`Shifted`, the default). Wherever the law is truncated the carrier phase
//! freezes and switching is cancelled. The amplitude A and truncation k are
//! tied together by the requirement that the accumulated carrier phase per
//! modulator period equals 2π·M̄, which fixes
//!
//!   A/ω_m = M̄·π / (2·[β(1/2 − k) + √(k(1−k))/2]),   β = acos √k,
//!
//! the bracket being the single-lobe integral of (cos²θ − k) over [0, β].

use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::config::{CarrierVariant, Strategy, StrategyConfig, K_MAX};
use crate::error::PwmError;

/// Modulator with harmonic injection: amplitude · Σ c_h·cos(h·x).
pub fn injected_modulator(x: f64, injection: &[(u32, f64)], amplitude_index: f64) -> f64 {
    amplitude_index
        * injection
            .iter()
            .map(|&(h, c)| c * (h as f64 * x).cos())
            .sum::<f64>()
}

/// Plain cosine modulator (cosine phase convention, so that the injected
/// and sinusoidal modulators share x = 0 as their positive peak).
pub fn sine_modulator(x: f64, amplitude_index: f64) -> f64 {
    amplitude_index * x.cos()
}

/// Instantaneous carrier pulsation at modulator phase `x`, truncated at
/// zero. Returned in the same units as `a` (rad/s when `a` is rad/s,
/// multiples of ω_m when `a` is given as A/ω_m).
pub fn instantaneous_pulsation(x: f64, a: f64, k: f64, variant: CarrierVariant) -> f64 {
    let s = match variant {
        CarrierVariant::Literal => x.cos() * x.cos() - k,
        CarrierVariant::Shifted => x.sin() * x.sin() - k,
    };
    (a * s).max(0.0)
}

/// Single-lobe integral of (cos²θ − k) over [0, acos √k].
fn lobe_integral(k: f64) -> f64 {
    let beta = k.sqrt().acos();
    beta * (0.5 - k) + (k * (1.0 - k)).sqrt() / 2.0
}

/// Carrier-law amplitude A (as a multiple of ω_m) for a given truncation
/// parameter and average modulation order.
pub fn solve_amplitude(k: f64, mean_order: f64) -> Result<f64, PwmError> {
    if !(0.0..=K_MAX).contains(&k) {
        return Err(PwmError::InvalidConfig(format!(
            "k must lie in [0, {K_MAX}], got {k}"
        )));
    }
    if !mean_order.is_finite() || mean_order <= 0.0 {
        return Err(PwmError::InvalidConfig(format!(
            "mean_order must be positive, got {mean_order}"
        )));
    }
    Ok(mean_order * PI / (2.0 * lobe_integral(k)))
}

/// Average modulation order produced by amplitude `a_over_wm` (in multiples
/// of ω_m) at truncation `k`. Inverse of [`solve_amplitude`].
pub fn average_order(a_over_wm: f64, k: f64) -> f64 {
    a_over_wm * 2.0 * lobe_integral(k) / PI
}

/// One active interval of the carrier law, in modulator phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Zone {
    /// Zone entry phase, rad, in [0, 2π).
    pub start: f64,
    /// Zone exit phase, rad.
    pub end: f64,
    /// Carrier phase accumulated at zone entry, rad.
    pub theta_start: f64,
}

/// A frozen interval between two active zones. `end` may exceed 2π when the
/// gap wraps around the period boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gap {
    pub start: f64,
    pub end: f64,
}

impl Gap {
    /// Gap midpoint reduced into [0, 2π).
    pub fn midpoint(&self) -> f64 {
        (0.5 * (self.start + self.end)).rem_euclid(TAU)
    }

    /// Cyclic containment; boundaries belong to the frozen region.
    pub fn contains(&self, x: f64) -> bool {
        let xx = if x < self.start { x + TAU } else { x };
        (self.start..=self.end).contains(&xx)
    }
}

/// Solved carrier description: amplitude, zone boundaries and per-zone
/// phase offsets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CarrierLaw {
    /// Carrier-law amplitude as a multiple of ω_m.
    pub a_over_wm: f64,
    pub k: f64,
    pub zones: Vec<Zone>,
    pub variant: CarrierVariant,
    /// Carrier phase accumulated over one full modulator period (2π·M̄).
    pub total_phase: f64,
}

/// Phase gained from zone entry `s` to phase `x` within an active zone:
/// the closed-form antiderivative of the untruncated pulsation law.
fn phase_gain(s: f64, x: f64, k: f64, a_over_wm: f64, variant: CarrierVariant) -> f64 {
    let sine_term = ((2.0 * x).sin() - (2.0 * s).sin()) / 4.0;
    match variant {
        CarrierVariant::Literal => a_over_wm * ((0.5 - k) * (x - s) + sine_term),
        CarrierVariant::Shifted => a_over_wm * ((0.5 - k) * (x - s) - sine_term),
    }
}

impl CarrierLaw {
    /// Peak instantaneous carrier order A(1−k)/ω_m.
    pub fn excursion(&self) -> f64 {
        self.a_over_wm * (1.0 - self.k)
    }

    /// Carrier phase at modulator phase `x` within one period. Frozen
    /// (constant) inside gaps, continuous everywhere.
    pub fn theta_at_phase(&self, x: f64) -> f64 {
        let x = x.rem_euclid(TAU);
        for z in &self.zones {
            if x < z.start {
                return z.theta_start;
            }
            if x <= z.end {
                return z.theta_start + phase_gain(z.start, x, self.k, self.a_over_wm, self.variant);
            }
        }
        self.total_phase
    }

    /// Frozen intervals between consecutive active zones (cyclic). Empty
    /// for k = 0, where the boundaries are measure-zero points.
    pub fn gaps(&self) -> Vec<Gap> {
        let n = self.zones.len();
        let mut out = Vec::new();
        for i in 0..n {
            let start = self.zones[i].end;
            let end = if i + 1 == n {
                self.zones[0].start + TAU
            } else {
                self.zones[i + 1].start
            };
            if end - start > 1e-12 {
                out.push(Gap { start, end });
            }
        }
        out
    }

    /// Index of the active zone whose interior contains `x`, if any.
    /// Zone boundaries count as frozen, not active.
    pub fn zone_containing(&self, x: f64) -> Option<usize> {
        let x = x.rem_euclid(TAU);
        self.zones
            .iter()
            .position(|z| z.start < x && x < z.end)
    }
}

/// Solve the carrier law for a config: amplitude from (k, M̄), zone
/// boundaries from the variant, and per-zone phase offsets accumulated so
/// that the carrier phase is continuous and totals 2π·M̄ per period.
pub fn build_carrier_law(config: &StrategyConfig) -> Result<CarrierLaw, PwmError> {
    if config.strategy != Strategy::HipwmFmtc3 {
        return Err(PwmError::InvalidConfig(format!(
            "carrier law only applies to the FM-carrier strategy, got {}",
            config.strategy
        )));
    }
    config.validate()?;
    let k = config.k;
    let a = solve_amplitude(k, config.mean_order)?;
    let variant = config.carrier_variant;

    let spans: Vec<(f64, f64)> = match variant {
        CarrierVariant::Shifted => {
            let t1 = k.sqrt().asin();
            vec![(t1, PI - t1), (PI + t1, TAU - t1)]
        }
        CarrierVariant::Literal => {
            let beta = k.sqrt().acos();
            vec![(0.0, beta), (PI - beta, PI + beta), (TAU - beta, TAU)]
        }
    };

    let mut zones = Vec::with_capacity(spans.len());
    let mut theta = 0.0;
    for (start, end) in spans {
        zones.push(Zone {
            start,
            end,
            theta_start: theta,
        });
        theta += phase_gain(start, end, k, a, variant);
    }

    Ok(CarrierLaw {
        a_over_wm: a,
        k,
        zones,
        variant,
        total_phase: theta,
    })
}

/// Carrier phase θ(t), rad, for any time (periodic extension adds 2π·M̄
/// per full modulator period; θ(0) = 0).
pub fn carrier_theta(t: f64, law: &CarrierLaw, omega_m: f64) -> f64 {
    let x_total = omega_m * t;
    let mut periods = (x_total / TAU).floor();
    let mut x = x_total - TAU * periods;
    if x >= TAU {
        x -= TAU;
        periods += 1.0;
    }
    periods * law.total_phase + law.theta_at_phase(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::DEFAULT_INJECTION;
    use std::f64::consts::FRAC_PI_2;

    fn fmtc3(k: f64, m: f64) -> StrategyConfig {
        StrategyConfig::fmtc3(50.0, m, k, 400.0)
    }

    #[test]
    fn injected_modulator_anchor_points() {
        let inj = DEFAULT_INJECTION;
        // all odd-harmonic cosines vanish at pi/2
        assert!(injected_modulator(FRAC_PI_2, &inj, 1.0).abs() < 1e-12);
        // 1.15 - 0.27 - 0.029
        assert!((injected_modulator(0.0, &inj, 1.0) - 0.851).abs() < 1e-12);
        // half-wave antisymmetry of the odd-harmonic sum
        assert!((injected_modulator(PI, &inj, 1.0) + 0.851).abs() < 1e-12);
    }

    #[test]
    fn sine_modulator_values() {
        assert_eq!(sine_modulator(0.0, 1.0), 1.0);
        assert!(sine_modulator(FRAC_PI_2, 1.0).abs() < 1e-15);
        assert!((sine_modulator(PI / 3.0, 0.8) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn pulsation_anchors() {
        let a = 94.2477796077;
        // cos² at x = 0 gives the full excursion A(1-k)
        let p = instantaneous_pulsation(0.0, a, 0.5, CarrierVariant::Literal);
        assert!((p - 47.1238898038).abs() < 1e-8);
        // sin² at pi/2 gives the same under the shifted law
        let p = instantaneous_pulsation(FRAC_PI_2, a, 0.5, CarrierVariant::Shifted);
        assert!((p - 47.1238898038).abs() < 1e-8);
        // zone boundary: exactly zero
        let t1 = 0.5f64.sqrt().asin();
        let p = instantaneous_pulsation(t1, a, 0.5, CarrierVariant::Shifted);
        assert!(p.abs() < 1e-12);
        // never negative deep inside a frozen zone
        assert_eq!(
            instantaneous_pulsation(0.0, a, 0.5, CarrierVariant::Shifted),
            0.0
        );
    }

    #[test]
    fn amplitude_anchors() {
        // A = 30π at the published operating point
        let a = solve_amplitude(0.5, 15.0).unwrap();
        assert!((a - 30.0 * PI).abs() < 1e-9, "a = {a}");
        assert!((a - 94.2477796077).abs() < 1e-9);
        // k = 0 limit: A = 2·M̄, max instantaneous order doubles
        let a0 = solve_amplitude(0.0, 15.0).unwrap();
        assert!((a0 - 30.0).abs() < 1e-12);
        // k = 0.8 excursion within 0.5% of the reported 77.45
        let a8 = solve_amplitude(0.8, 15.0).unwrap();
        let exc = a8 * 0.2;
        assert!((exc - 77.3718657182).abs() < 1e-8);
        assert!((exc - 77.45).abs() / 77.45 < 5e-3);
        // k out of range rejected
        assert!(solve_amplitude(1.0, 15.0).is_err());
    }

    #[test]
    fn average_order_inverts_solve() {
        assert!((average_order(94.2477796077, 0.5) - 15.0).abs() < 1e-9);
        assert!((average_order(2.0 * 15.0, 0.0) - 15.0).abs() < 1e-12);
        assert_eq!(average_order(0.0, 0.3), 0.0);
        for &k in &[0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9] {
            for &m in &[9.0, 15.0, 21.0, 27.0] {
                let a = solve_amplitude(k, m).unwrap();
                assert!(
                    (average_order(a, k) - m).abs() / m < 1e-9,
                    "round trip failed at k={k} m={m}"
                );
            }
        }
    }

    #[test]
    fn law_zone_boundaries() {
        let law = build_carrier_law(&fmtc3(0.5, 15.0)).unwrap();
        // asin sqrt(0.5) = pi/4
        assert!((law.zones[0].start - PI / 4.0).abs() < 1e-12);
        assert!((law.zones[0].end - 3.0 * PI / 4.0).abs() < 1e-12);
        assert!((law.zones[1].start - 5.0 * PI / 4.0).abs() < 1e-12);
        assert!((law.zones[1].end - 7.0 * PI / 4.0).abs() < 1e-12);
        // total phase is 2π·M̄
        assert!((law.total_phase - TAU * 15.0).abs() / (TAU * 15.0) < 1e-12);
    }

    #[test]
    fn law_k_zero_spans_everything() {
        let law = build_carrier_law(&fmtc3(0.0, 15.0)).unwrap();
        assert!(law.gaps().is_empty());
        let covered: f64 = law.zones.iter().map(|z| z.end - z.start).sum();
        assert!((covered - TAU).abs() < 1e-12);
    }

    #[test]
    fn literal_zones_contain_peaks() {
        let mut cfg = fmtc3(0.5, 15.0);
        cfg.carrier_variant = CarrierVariant::Literal;
        let law = build_carrier_law(&cfg).unwrap();
        assert!(law.zone_containing(0.1).is_some());
        assert!(law.zone_containing(PI).is_some());
        assert!(law.zone_containing(FRAC_PI_2).is_none());
        let gaps = law.gaps();
        assert_eq!(gaps.len(), 2);
        assert!((gaps[0].midpoint() - FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn shifted_gap_midpoints_sit_on_modulator_extremes() {
        let law = build_carrier_law(&fmtc3(0.5, 15.0)).unwrap();
        let gaps = law.gaps();
        assert_eq!(gaps.len(), 2);
        assert!((gaps[0].midpoint() - PI).abs() < 1e-12);
        // wrap gap is centered on x = 0
        assert!(gaps[1].midpoint().abs() < 1e-12 || (gaps[1].midpoint() - TAU).abs() < 1e-12);
        assert!(gaps[1].contains(0.0));
        assert!(gaps[1].contains(TAU - 0.1));
    }

    #[test]
    fn theta_spot_values() {
        let law = build_carrier_law(&fmtc3(0.5, 15.0)).unwrap();
        assert!((law.theta_at_phase(1.2) - 7.646718658499).abs() < 1e-9);
        // frozen at zone entry value inside the leading gap
        assert_eq!(law.theta_at_phase(0.3), 0.0);
        let mut cfg = fmtc3(0.5, 15.0);
        cfg.carrier_variant = CarrierVariant::Literal;
        let lit = build_carrier_law(&cfg).unwrap();
        assert!((lit.theta_at_phase(0.5) - 19.826692980611).abs() < 1e-9);
        let law8 = build_carrier_law(&fmtc3(0.8, 15.0)).unwrap();
        assert!((law8.theta_at_phase(2.0) - 46.943537751139).abs() < 1e-9);
    }

    #[test]
    fn theta_closed_form_half_period_k_zero_literal() {
        let mut cfg = fmtc3(0.0, 15.0);
        cfg.carrier_variant = CarrierVariant::Literal;
        let law = build_carrier_law(&cfg).unwrap();
        let omega = cfg.omega_m();
        let half = cfg.period() / 2.0;
        // A·0.5·(T/2) with the sine term vanishing: π·M̄
        let theta = carrier_theta(half, &law, omega);
        assert!((theta - PI * 15.0).abs() < 1e-9);
    }

    #[test]
    fn theta_periodic_extension() {
        let cfg = fmtc3(0.5, 15.0);
        let law = build_carrier_law(&cfg).unwrap();
        let omega = cfg.omega_m();
        let t0 = 0.0123 * cfg.period();
        let one = carrier_theta(t0 + cfg.period(), &law, omega);
        let base = carrier_theta(t0, &law, omega);
        assert!((one - base - TAU * 15.0).abs() < 1e-8);
        // full period from zero
        assert!((carrier_theta(cfg.period(), &law, omega) - TAU * 15.0).abs() < 1e-8);
        // zone entry hits theta_start
        let t_entry = law.zones[1].start / omega;
        assert!((carrier_theta(t_entry, &law, omega) - law.zones[1].theta_start).abs() < 1e-9);
    }

    #[test]
    fn theta_matches_pulsation_by_finite_differences() {
        let cfg = fmtc3(0.5, 15.0);
        let law = build_carrier_law(&cfg).unwrap();
        let omega = cfg.omega_m();
        let period = cfg.period();
        let h = period * 1e-7;
        // probe well inside the first active zone
        for &x in &[1.0, 1.4, FRAC_PI_2, 2.0, 2.2] {
            let t = x / omega;
            let dtheta = (carrier_theta(t + h, &law, omega) - carrier_theta(t - h, &law, omega))
                / (2.0 * h);
            let expect = instantaneous_pulsation(x, law.a_over_wm * omega, law.k, law.variant);
            assert!(
                (dtheta - expect).abs() / expect < 1e-4,
                "x={x}: {dtheta} vs {expect}"
            );
        }
    }
}
