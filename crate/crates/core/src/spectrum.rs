//! Exact Fourier analysis of piecewise-constant waveforms and the scalar
//! distortion metrics built on it.
//!
//! The switched waveform is constant between edges, so its Fourier
//! coefficients reduce to closed-form sums over the segments: a segment at
//! level L over [u, v] contributes L(v−u)/T to the mean and
//! 2L·(sin nω₀v − sin nω₀u)/(nω₀T) to a_n. No windowing, no leakage — the
//! waveform is exactly periodic. A discrete Fourier path over uniform
//! samples exists as an independent oracle; it is never used as the
//! primary route.

use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::io::{self, Write};

use crate::error::PwmError;
use crate::sigfmt::fmt_sci;
use crate::synthesis::{Edge, SwitchedWaveform};

/// One harmonic of the modulator fundamental.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralLine {
    /// Cosine coefficient, volts.
    pub a: f64,
    /// Sine coefficient, volts.
    pub b: f64,
    /// √(a² + b²), volts.
    pub magnitude: f64,
}

/// Harmonic table over the modulator fundamental.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    /// Base frequency, Hz.
    pub f0: f64,
    /// Mean value (a₀/2 term), volts.
    pub dc: f64,
    /// Lines for n = 1..=N; `lines[i]` is harmonic n = i + 1.
    pub lines: Vec<SpectralLine>,
}

impl Spectrum {
    /// Magnitude of harmonic `n` (1-based).
    pub fn magnitude(&self, n: usize) -> f64 {
        assert!(n >= 1, "harmonics are 1-based");
        self.lines[n - 1].magnitude
    }

    /// Frequency of harmonic `n`, Hz.
    pub fn line_frequency(&self, n: usize) -> f64 {
        n as f64 * self.f0
    }

    /// dc² + ½Σ(aₙ² + bₙ²): mean-square power captured by the table.
    pub fn total_power(&self) -> f64 {
        self.dc * self.dc
            + 0.5
                * self
                    .lines
                    .iter()
                    .map(|l| l.magnitude * l.magnitude)
                    .sum::<f64>()
    }

    /// Spectrum CSV: `n,f_hz,a_n,b_n,magnitude`, 12 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(b"n,f_hz,a_n,b_n,magnitude\n")?;
        for (i, l) in self.lines.iter().enumerate() {
            let n = i + 1;
            writeln!(
                w,
                "{},{},{},{},{}",
                n,
                fmt_sci(self.line_frequency(n), 12),
                fmt_sci(l.a, 12),
                fmt_sci(l.b, 12),
                fmt_sci(l.magnitude, 12)
            )?;
        }
        Ok(())
    }

    pub fn csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("write to Vec");
        String::from_utf8(buf).expect("csv is ascii")
    }
}

/// Closed-form Fourier coefficients of the edge list, exact to rounding.
pub fn fourier_from_edges(waveform: &SwitchedWaveform, n_max: usize) -> Spectrum {
    let t_period = waveform.period;
    let omega0 = TAU / t_period;

    // segment boundaries (time, level up to the next boundary)
    let mut bounds = Vec::with_capacity(waveform.edges.len() + 2);
    bounds.push((0.0, waveform.initial_level));
    for e in &waveform.edges {
        bounds.push((e.time, e.level));
    }

    let mut dc = 0.0;
    let mut lines = vec![
        SpectralLine {
            a: 0.0,
            b: 0.0,
            magnitude: 0.0
        };
        n_max
    ];
    for i in 0..bounds.len() {
        let (u, level) = bounds[i];
        let v = if i + 1 < bounds.len() {
            bounds[i + 1].0
        } else {
            t_period
        };
        dc += level * (v - u) / t_period;
        for (j, line) in lines.iter_mut().enumerate() {
            let n = (j + 1) as f64;
            let scale = 2.0 * level / (n * omega0 * t_period);
            let (su, cu) = (n * omega0 * u).sin_cos();
            let (sv, cv) = (n * omega0 * v).sin_cos();
            line.a += scale * (sv - su);
            line.b += scale * (cu - cv);
        }
    }
    for line in &mut lines {
        line.magnitude = line.a.hypot(line.b);
    }
    Spectrum {
        f0: 1.0 / t_period,
        dc,
        lines,
    }
}

/// Discrete Fourier sums over uniform samples spanning an integer number
/// of periods of `f0`. Oracle path only: resolution is limited by the
/// zero-order-hold quantization of the edge times.
pub fn dft_spectrum(
    samples: &[f64],
    f0: f64,
    sample_rate: f64,
    n_max: usize,
) -> Result<Spectrum, PwmError> {
    let count = samples.len();
    let periods = count as f64 * f0 / sample_rate;
    let p = periods.round();
    if p < 1.0 || (periods - p).abs() > 1e-9 * p.max(1.0) {
        return Err(PwmError::NonintegralPeriods {
            count,
            rate: sample_rate,
            f0,
            periods,
        });
    }
    let p = p as usize;

    // phase table on the synchronous grid: angle(r) = 2π r / count
    let mut cos_t = Vec::with_capacity(count);
    let mut sin_t = Vec::with_capacity(count);
    for r in 0..count {
        let (s, c) = (TAU * r as f64 / count as f64).sin_cos();
        cos_t.push(c);
        sin_t.push(s);
    }

    let dc = samples.iter().sum::<f64>() / count as f64;
    let mut lines = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let stride = (n * p) % count;
        let mut r = 0usize;
        let mut a = 0.0;
        let mut b = 0.0;
        for &x in samples {
            a += x * cos_t[r];
            b += x * sin_t[r];
            r += stride;
            if r >= count {
                r -= count;
            }
        }
        a *= 2.0 / count as f64;
        b *= 2.0 / count as f64;
        lines.push(SpectralLine {
            a,
            b,
            magnitude: a.hypot(b),
        });
    }
    Ok(Spectrum { f0, dc, lines })
}

/// Noise floor below which lines are ignored by the ratio metrics,
/// relative to the largest line in the table.
fn magnitude_floor(spectrum: &Spectrum) -> f64 {
    1e-12
        * spectrum
            .lines
            .iter()
            .map(|l| l.magnitude)
            .fold(0.0, f64::max)
}

fn harmonic_ratio<F: Fn(f64, f64) -> f64>(
    spectrum: &Spectrum,
    n_max: usize,
    weight: F,
) -> Result<f64, PwmError> {
    let floor = magnitude_floor(spectrum);
    let m1 = spectrum.lines.first().map_or(0.0, |l| l.magnitude);
    if m1 <= floor || m1 == 0.0 {
        return Err(PwmError::ZeroFundamental);
    }
    let n_max = n_max.min(spectrum.lines.len());
    let mut sum = 0.0;
    for (i, l) in spectrum.lines[1..n_max].iter().enumerate() {
        if l.magnitude > floor {
            let w = weight(l.magnitude, (i + 2) as f64);
            sum += w * w;
        }
    }
    Ok(sum.sqrt() / m1)
}

/// Total harmonic distortion √(Σ mₙ²)/m₁ over n = 2..=n_max.
pub fn thd(spectrum: &Spectrum, n_max: usize) -> Result<f64, PwmError> {
    harmonic_ratio(spectrum, n_max, |m, _| m)
}

/// Frequency-weighted THD: √(Σ (mₙ/n)²)/m₁.
pub fn wthd(spectrum: &Spectrum, n_max: usize) -> Result<f64, PwmError> {
    harmonic_ratio(spectrum, n_max, |m, n| m / n)
}

/// Distortion factor: √(Σ (mₙ/n²)²)/m₁.
pub fn df(spectrum: &Spectrum, n_max: usize) -> Result<f64, PwmError> {
    harmonic_ratio(spectrum, n_max, |m, n| m / (n * n))
}

/// Spectral energy ½Σmₙ² captured in each band (inclusive bounds).
/// Bands are expected non-overlapping with f_lo < f_hi.
pub fn band_energy(spectrum: &Spectrum, bands: &[(f64, f64)]) -> Vec<f64> {
    bands
        .iter()
        .map(|&(lo, hi)| {
            spectrum
                .lines
                .iter()
                .enumerate()
                .filter(|(i, _)| {
                    let f = (i + 1) as f64 * spectrum.f0;
                    f >= lo && f <= hi
                })
                .map(|(_, l)| 0.5 * l.magnitude * l.magnitude)
                .sum()
        })
        .collect()
}

/// Scalar summary of one synthesized waveform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub thd: f64,
    pub wthd: f64,
    pub df: f64,
    /// Fundamental magnitude, volts.
    pub fundamental: f64,
    /// (f_lo, f_hi, energy V²) per requested band.
    pub band_energies: Vec<(f64, f64, f64)>,
    pub edge_count: usize,
}

/// Full metric set for a waveform whose spectrum has been computed.
pub fn metrics_report(
    waveform: &SwitchedWaveform,
    spectrum: &Spectrum,
    bands: &[(f64, f64)],
    n_max: usize,
) -> Result<MetricsReport, PwmError> {
    let energies = band_energy(spectrum, bands);
    Ok(MetricsReport {
        thd: thd(spectrum, n_max)?,
        wthd: wthd(spectrum, n_max)?,
        df: df(spectrum, n_max)?,
        fundamental: spectrum.magnitude(1),
        band_energies: bands
            .iter()
            .zip(energies)
            .map(|(&(lo, hi), e)| (lo, hi, e))
            .collect(),
        edge_count: waveform.edge_count(),
    })
}

/// Line-line combination V_AB(t) = V_A(t) − V_A(t − shift), with the shift
/// given as modulator phase (2π/3 for a balanced three-phase leg pair).
/// The result is a piecewise-constant three-level waveform.
pub fn line_line(waveform: &SwitchedWaveform, phase_shift: f64) -> SwitchedWaveform {
    let period = waveform.period;
    let shift_t = phase_shift / TAU * period;

    // breakpoints from both legs: (time, source, new level)
    let mut breaks: Vec<(f64, u8, f64)> = Vec::with_capacity(2 * waveform.edges.len());
    for e in &waveform.edges {
        breaks.push((e.time, 0, e.level));
        breaks.push(((e.time + shift_t).rem_euclid(period), 1, e.level));
    }
    breaks.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));

    let mut la = waveform.level_at(0.0);
    let mut lb = waveform.level_at(-shift_t);
    let initial = la - lb;
    let mut current = initial;
    let mut edges = Vec::new();

    let mut i = 0;
    while i < breaks.len() {
        let t = breaks[i].0;
        // apply every breakpoint sharing this exact time before emitting;
        // breakpoints at t = 0 are already folded into the initial levels
        while i < breaks.len() && breaks[i].0 == t {
            match breaks[i].1 {
                0 => la = breaks[i].2,
                _ => lb = breaks[i].2,
            }
            i += 1;
        }
        let v = la - lb;
        if v != current && t > 0.0 {
            edges.push(Edge { time: t, level: v });
            current = v;
        }
    }

    let swing = waveform.levels.1 - waveform.levels.0;
    SwitchedWaveform {
        period,
        levels: (-swing, swing),
        initial_level: initial,
        edges,
        meta: waveform.meta.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::StrategyConfig;
    use crate::synthesis::{sample, synthesize, WaveformMeta};
    use std::f64::consts::PI;

    fn square_wave(e: f64, f_m: f64) -> SwitchedWaveform {
        let cfg = StrategyConfig::spwm(f_m, 15.0, 1.0, e);
        SwitchedWaveform {
            period: 1.0 / f_m,
            levels: (-e / 2.0, e / 2.0),
            initial_level: e / 2.0,
            edges: vec![Edge {
                time: 0.5 / f_m,
                level: -e / 2.0,
            }],
            meta: WaveformMeta {
                config: cfg,
                law: None,
                max_carrier_order: 1.0,
                warnings: Vec::new(),
            },
        }
    }

    #[test]
    fn square_wave_lines_match_closed_form() {
        let e = 400.0;
        let sp = fourier_from_edges(&square_wave(e, 50.0), 40);
        assert!(sp.dc.abs() < 1e-10);
        for n in 1..=40 {
            let expect = if n % 2 == 1 {
                4.0 / (n as f64 * PI) * (e / 2.0)
            } else {
                0.0
            };
            assert!(
                (sp.magnitude(n) - expect).abs() < 1e-9,
                "n={n}: {} vs {expect}",
                sp.magnitude(n)
            );
        }
    }

    #[test]
    fn constant_level_is_pure_dc() {
        let mut w = square_wave(400.0, 50.0);
        w.edges.clear();
        w.initial_level = 200.0;
        let sp = fourier_from_edges(&w, 20);
        assert!((sp.dc - 200.0).abs() < 1e-12);
        assert!(sp.lines.iter().all(|l| l.magnitude < 1e-10));
    }

    #[test]
    fn fmtc3_fundamental_tracks_injection() {
        let cfg = StrategyConfig::fmtc3(50.0, 15.0, 0.5, 400.0);
        let w = synthesize(&cfg).unwrap();
        let sp = fourier_from_edges(&w, 200);
        assert!((sp.magnitude(1) - 239.433163).abs() < 0.01);
        // within 5% of the quasi-static expectation 1.15·E/2
        assert!((sp.magnitude(1) - 230.0).abs() / 230.0 < 0.05);
        // a handful of frozen oracle lines
        for (n, expect) in [(3, 46.276562), (5, 4.795813), (7, 3.680149), (9, 1.719877)] {
            assert!(
                (sp.magnitude(n) - expect).abs() / expect < 1e-4,
                "n={n}: {}",
                sp.magnitude(n)
            );
        }
    }

    #[test]
    fn dft_pure_cosine_and_zero() {
        let n = 4096;
        let rate = n as f64; // one period of a 1 Hz tone
        let samples: Vec<f64> = (0..n).map(|j| (TAU * j as f64 / n as f64).cos()).collect();
        let sp = dft_spectrum(&samples, 1.0, rate, 8).unwrap();
        assert!((sp.lines[0].a - 1.0).abs() < 1e-9);
        assert!(sp.lines[0].b.abs() < 1e-9);
        assert!(sp.lines[1..].iter().all(|l| l.magnitude < 1e-9));

        let zeros = vec![0.0; n];
        let sp = dft_spectrum(&zeros, 1.0, rate, 8).unwrap();
        assert!(sp.dc.abs() < 1e-15);
        assert!(sp.lines.iter().all(|l| l.magnitude == 0.0));
    }

    #[test]
    fn dft_rejects_nonintegral_periods() {
        let samples = vec![0.0; 1000];
        let err = dft_spectrum(&samples, 1.0, 999.5, 4).unwrap_err();
        assert!(matches!(err, PwmError::NonintegralPeriods { .. }));
    }

    #[test]
    fn dft_square_wave_agrees_with_exact_path() {
        let w = square_wave(400.0, 50.0);
        let rate = (1 << 14) as f64 / w.period;
        let samples = sample(&w, rate, 1).unwrap();
        let dft = dft_spectrum(&samples, 50.0, rate, 50).unwrap();
        let exact = fourier_from_edges(&w, 50);
        for n in (1..=49).step_by(2) {
            let rel = (dft.magnitude(n) - exact.magnitude(n)).abs() / exact.magnitude(n);
            assert!(rel < 1e-3, "n={n}: rel={rel}");
        }
    }

    #[test]
    fn thd_values() {
        // single line
        let sp = Spectrum {
            f0: 50.0,
            dc: 0.0,
            lines: vec![SpectralLine {
                a: 1.0,
                b: 0.0,
                magnitude: 1.0,
            }],
        };
        assert_eq!(thd(&sp, 100).unwrap(), 0.0);

        // m1 = 1, m5 = 0.1
        let mut lines = vec![
            SpectralLine {
                a: 0.0,
                b: 0.0,
                magnitude: 0.0
            };
            5
        ];
        lines[0].magnitude = 1.0;
        lines[4].magnitude = 0.1;
        let sp = Spectrum {
            f0: 50.0,
            dc: 0.0,
            lines,
        };
        assert!((thd(&sp, 5).unwrap() - 0.1).abs() < 1e-15);
        assert!((wthd(&sp, 5).unwrap() - 0.02).abs() < 1e-15);
        assert!((df(&sp, 5).unwrap() - 0.004).abs() < 1e-15);

        // ideal square wave to N = 1e5 approaches sqrt(pi^2/8 - 1)
        let sp = fourier_from_edges(&square_wave(2.0, 50.0), 100_000);
        let t = thd(&sp, 100_000).unwrap();
        assert!((t - (PI * PI / 8.0 - 1.0).sqrt()).abs() < 1e-4, "thd={t}");

        // zero fundamental rejected
        let sp = Spectrum {
            f0: 50.0,
            dc: 0.0,
            lines: vec![SpectralLine {
                a: 0.0,
                b: 0.0,
                magnitude: 0.0,
            }],
        };
        assert!(matches!(thd(&sp, 10), Err(PwmError::ZeroFundamental)));
    }

    #[test]
    fn band_energy_selects_lines() {
        let sp = fourier_from_edges(&square_wave(2.0, 50.0), 10);
        // no lines between harmonics
        assert_eq!(band_energy(&sp, &[(60.0, 90.0)])[0], 0.0);
        // fundamental only: ½·m₁²
        let m1 = sp.magnitude(1);
        let e = band_energy(&sp, &[(25.0, 75.0)])[0];
        assert!((e - 0.5 * m1 * m1).abs() < 1e-12);
    }

    #[test]
    fn line_line_zero_shift_cancels() {
        let cfg = StrategyConfig::fmtc3(50.0, 15.0, 0.5, 400.0);
        let w = synthesize(&cfg).unwrap();
        let ab = line_line(&w, 0.0);
        assert_eq!(ab.edge_count(), 0);
        assert_eq!(ab.initial_level, 0.0);
    }

    #[test]
    fn line_line_fundamental_and_triplens() {
        let cfg = StrategyConfig::fmtc3(50.0, 15.0, 0.5, 400.0);
        let w = synthesize(&cfg).unwrap();
        let ab = line_line(&w, TAU / 3.0);
        let sa = fourier_from_edges(&w, 200);
        let sab = fourier_from_edges(&ab, 200);
        // √3 magnitude gain, π/6 phase lead on the fundamental
        assert!((sab.magnitude(1) - 3f64.sqrt() * sa.magnitude(1)).abs() < 1e-6);
        let phase = sab.lines[0].b.atan2(sab.lines[0].a);
        assert!((phase + PI / 6.0).abs() < 1e-9, "phase={phase}");
        // triplen harmonics cancel
        for n in (3..=198).step_by(3) {
            assert!(
                sab.magnitude(n) < 1e-6 * 400.0,
                "triplen n={n}: {}",
                sab.magnitude(n)
            );
        }
    }

    #[test]
    fn spectrum_csv_schema() {
        let sp = fourier_from_edges(&square_wave(400.0, 50.0), 4);
        let csv = sp.csv_string();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "n,f_hz,a_n,b_n,magnitude");
        assert_eq!(csv.lines().count(), 5);
        assert!(lines.next().unwrap().starts_with("1,5.00000000000e1,"));
    }

    #[test]
    fn metrics_report_collects_everything() {
        let cfg = StrategyConfig::fmtc3(50.0, 15.0, 0.5, 400.0);
        let w = synthesize(&cfg).unwrap();
        let sp = fourier_from_edges(&w, 200);
        let m = metrics_report(&w, &sp, &[(25.0, 75.0)], 100).unwrap();
        assert_eq!(m.edge_count, 30);
        assert!((m.thd - 0.558404).abs() < 1e-4);
        assert!((m.wthd - 0.065606).abs() < 1e-4);
        assert!((m.df - 0.021495).abs() < 1e-4);
        assert_eq!(m.band_energies.len(), 1);
    }

    #[test]
    fn parseval_bounded_by_signal_power() {
        for cfg in [
            StrategyConfig::fmtc3(50.0, 15.0, 0.5, 400.0),
            StrategyConfig::spwm(50.0, 15.0, 1.0, 400.0),
        ] {
            let w = synthesize(&cfg).unwrap();
            let sp = fourier_from_edges(&w, 1000);
            let power = sp.total_power();
            assert!(power <= 200.0 * 200.0 * (1.0 + 1e-9));
            assert!(power > 200.0 * 200.0 * 0.99);
        }
    }

    #[test]
    fn fundamental_nearly_zero_at_zero_modulation() {
        let cfg = StrategyConfig::spwm(50.0, 15.0, 0.0, 400.0);
        let w = synthesize(&cfg).unwrap();
        let sp = fourier_from_edges(&w, 10);
        assert!(sp.magnitude(1) < 1e-6 * 200.0);
    }
}
