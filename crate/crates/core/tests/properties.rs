//! Property checks for the modulation laws and the synthesized waveforms.

use proptest::prelude::*;
use std::f64::consts::{PI, TAU};

use pwm_forge_core::config::{CarrierVariant, StrategyConfig, DEFAULT_INJECTION};
use pwm_forge_core::modulation::{
    average_order, build_carrier_law, carrier_theta, injected_modulator, instantaneous_pulsation,
    solve_amplitude,
};
use pwm_forge_core::synthesis::{carrier_wave, synthesize, triangle};

proptest! {
    #[test]
    fn amplitude_round_trips_through_average_order(
        k in 0.0..0.95f64,
        m in 3.0..60.0f64,
    ) {
        let a = solve_amplitude(k, m).unwrap();
        let back = average_order(a, k);
        prop_assert!((back - m).abs() / m < 1e-9);
    }

    #[test]
    fn pulsation_is_never_negative(
        x in -10.0..10.0f64,
        a in 0.1..4000.0f64,
        k in 0.0..0.95f64,
        literal in any::<bool>(),
    ) {
        let variant = if literal { CarrierVariant::Literal } else { CarrierVariant::Shifted };
        prop_assert!(instantaneous_pulsation(x, a, k, variant) >= 0.0);
    }

    #[test]
    fn triangle_bounded_and_periodic(theta in -50.0..50.0f64) {
        let v = triangle(theta);
        prop_assert!((-1.0..=1.0).contains(&v));
        prop_assert!((triangle(theta + TAU) - v).abs() < 1e-9);
        // the comparator carrier is the even alignment of the same triangle
        prop_assert!((carrier_wave(theta) - carrier_wave(-theta)).abs() < 1e-9);
    }

    #[test]
    fn injected_modulator_is_half_wave_antisymmetric(x in -10.0..10.0f64) {
        let h = injected_modulator(x, &DEFAULT_INJECTION, 1.0);
        let shifted = injected_modulator(x + PI, &DEFAULT_INJECTION, 1.0);
        prop_assert!((h + shifted).abs() < 1e-12);
    }

    #[test]
    fn carrier_phase_is_nondecreasing(
        k in 0.0..0.95f64,
        t1 in 0.0..0.08f64,
        dt in 0.0..0.04f64,
        literal in any::<bool>(),
    ) {
        let mut cfg = StrategyConfig::fmtc3(50.0, 15.0, k, 400.0);
        if literal {
            cfg.carrier_variant = CarrierVariant::Literal;
        }
        let law = build_carrier_law(&cfg).unwrap();
        let omega = cfg.omega_m();
        let a = carrier_theta(t1, &law, omega);
        let b = carrier_theta(t1 + dt, &law, omega);
        prop_assert!(b >= a - 1e-10);
        // continuity: a small step moves the phase by at most the peak rate
        let h = 1e-7 * 0.02;
        let c = carrier_theta(t1 + h, &law, omega);
        prop_assert!((c - a).abs() <= law.excursion() * omega * h * 1.01 + 1e-12);
    }
}

#[test]
fn injected_peak_stays_in_flat_top_band() {
    // dense scan: the default injection is a flat-top design with peak
    // just under unity, located near x = 0.5 rad
    let mut peak = 0.0;
    let mut arg = 0.0;
    for i in 0..2_000_000 {
        let x = TAU * i as f64 / 2_000_000.0;
        let h = injected_modulator(x, &DEFAULT_INJECTION, 1.0).abs();
        if h > peak {
            peak = h;
            arg = x;
        }
    }
    assert!(peak <= 1.0 + 1e-3, "peak = {peak}");
    assert!((peak - 0.9962348233).abs() < 1e-6);
    let folded = [arg, (arg - PI).abs(), (TAU - arg).abs()]
        .into_iter()
        .fold(f64::MAX, f64::min);
    assert!((folded - 0.5011).abs() < 0.01, "peak at x = {arg}");
}

#[test]
fn finite_difference_phase_matches_pulsation() {
    for &(k, variant) in &[
        (0.0, CarrierVariant::Shifted),
        (0.5, CarrierVariant::Shifted),
        (0.8, CarrierVariant::Shifted),
        (0.5, CarrierVariant::Literal),
    ] {
        let mut cfg = StrategyConfig::fmtc3(50.0, 15.0, k, 400.0);
        cfg.carrier_variant = variant;
        let law = build_carrier_law(&cfg).unwrap();
        let omega = cfg.omega_m();
        let period = cfg.period();
        let h = period * 1e-7;
        for zone in &law.zones {
            // probe strictly inside the zone
            for frac in [0.15, 0.4, 0.6, 0.85] {
                let x = zone.start + (zone.end - zone.start) * frac;
                let t = x / omega;
                let fd = (carrier_theta(t + h, &law, omega) - carrier_theta(t - h, &law, omega))
                    / (2.0 * h);
                let exact = instantaneous_pulsation(x, law.a_over_wm * omega, k, variant);
                assert!(
                    (fd - exact).abs() / exact.max(1e-6) < 1e-4,
                    "k={k} x={x}: {fd} vs {exact}"
                );
            }
        }
    }
}

#[test]
fn waveform_is_half_wave_antisymmetric() {
    for cfg in [
        StrategyConfig::fmtc3(50.0, 15.0, 0.5, 400.0),
        StrategyConfig::fmtc3(50.0, 15.0, 0.0, 400.0),
        StrategyConfig::spwm(50.0, 15.0, 1.0, 400.0),
        StrategyConfig::hipwm_fixed(50.0, 15.0, 400.0),
    ] {
        let w = synthesize(&cfg).unwrap();
        let half = w.period / 2.0;
        for i in 0..2000 {
            let t = w.period * (i as f64 + 0.13) / 2000.0;
            // skip instants too close to an edge on either half
            let near_edge = w.edges.iter().any(|e| {
                (e.time - t).abs() < 1e-6 * w.period
                    || (e.time - (t + half) % w.period).abs() < 1e-6 * w.period
            });
            if near_edge {
                continue;
            }
            assert_eq!(
                w.level_at(t),
                -w.level_at(t + half),
                "strategy {:?} at t={t}",
                cfg.strategy
            );
        }
    }
}

#[test]
fn synchronized_waveform_repeats_each_period() {
    let cfg = StrategyConfig::fmtc3(50.0, 15.0, 0.5, 400.0);
    let law = build_carrier_law(&cfg).unwrap();
    let omega = cfg.omega_m();
    // integer mean order: the comparator carrier is identical one period on
    for i in 0..5000 {
        let t = cfg.period() * i as f64 / 5000.0;
        let c0 = carrier_wave(carrier_theta(t, &law, omega));
        let c1 = carrier_wave(carrier_theta(t + cfg.period(), &law, omega));
        assert!((c0 - c1).abs() < 1e-6, "t={t}: {c0} vs {c1}");
    }
}

#[test]
fn edge_count_slope_is_two_per_order() {
    let mut counts = Vec::new();
    for m in [9.0, 15.0, 21.0, 27.0] {
        let w = synthesize(&StrategyConfig::fmtc3(50.0, m, 0.5, 400.0)).unwrap();
        counts.push((m, w.edge_count() as f64));
    }
    for w in counts.windows(2) {
        let slope = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
        assert!((slope - 2.0).abs() <= 0.2, "slope {slope}");
    }
}
