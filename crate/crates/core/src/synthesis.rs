//! Comparator-based synthesis of the two-level switched waveform.
//!
//! Within active zones the output is +E/2 where the modulator exceeds the
//! triangular carrier and −E/2 otherwise; switching edges are located by
//! bracketing the comparator difference on a dense grid and bisecting each
//! sign change. Within frozen zones the carrier holds still and the output
//! is clamped to ±E/2 by the sign of the modulator at the zone midpoint.
//!
//! The comparator carrier is the triangle aligned so that each carrier
//! cycle starts at its trough (carrier value −1 at accumulated phase 0).
//! This alignment makes every per-cycle output pulse centered where the
//! carrier phase is ≡ 0 (mod 2π), which keeps the synthesized waveform
//! time-even and its Fourier sine coefficients identically zero.

use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_2_PI, FRAC_PI_2, PI, TAU};
use std::io::{self, Write};

use crate::config::{Strategy, StrategyConfig, Warning};
use crate::error::PwmError;
use crate::modulation::{build_carrier_law, CarrierLaw};
use crate::sigfmt::fmt_sig;

/// Piecewise-linear triangle, period 2π: triangle(0) = 0 rising,
/// triangle(π/2) = 1, triangle(3π/2) = −1.
pub fn triangle(theta: f64) -> f64 {
    let th = theta.rem_euclid(TAU);
    if th < FRAC_PI_2 {
        th * FRAC_2_PI
    } else if th < 3.0 * FRAC_PI_2 {
        (PI - th) * FRAC_2_PI
    } else {
        (th - TAU) * FRAC_2_PI
    }
}

/// Comparator carrier: the triangle shifted a quarter period so the cycle
/// starts at the trough. Even in θ, so comparison against an even
/// modulator yields a time-even waveform.
pub fn carrier_wave(theta: f64) -> f64 {
    triangle(theta - FRAC_PI_2)
}

/// One switching instant: the output assumes `level` at `time`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub time: f64,
    pub level: f64,
}

/// Inputs and diagnostics retained with a synthesized waveform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveformMeta {
    pub config: StrategyConfig,
    pub law: Option<CarrierLaw>,
    /// Peak instantaneous carrier frequency as a multiple of f_m.
    pub max_carrier_order: f64,
    pub warnings: Vec<Warning>,
}

/// Exact switched waveform over one modulator period: ordered edge list
/// plus the level held from t = 0 until the first edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchedWaveform {
    /// Modulator period, s.
    pub period: f64,
    /// Nominal output rails (low, high), volts.
    pub levels: (f64, f64),
    /// Level on [0, first edge).
    pub initial_level: f64,
    /// Edges in strictly increasing time order, all within [0, period).
    pub edges: Vec<Edge>,
    pub meta: WaveformMeta,
}

impl SwitchedWaveform {
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Level at time `t` (periodic extension for any real t).
    pub fn level_at(&self, t: f64) -> f64 {
        let tt = t.rem_euclid(self.period);
        let idx = self.edges.partition_point(|e| e.time <= tt);
        if idx == 0 {
            self.initial_level
        } else {
            self.edges[idx - 1].level
        }
    }

    /// Peak instantaneous carrier frequency, Hz.
    pub fn max_carrier_hz(&self) -> f64 {
        self.meta.max_carrier_order / self.period
    }

    /// Edge-list CSV: `t_seconds,level_volts`, 12 significant digits, LF.
    pub fn write_edges_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(b"t_seconds,level_volts\n")?;
        for e in &self.edges {
            writeln!(w, "{},{}", fmt_sig(e.time, 12), fmt_sig(e.level, 12))?;
        }
        Ok(())
    }

    pub fn edges_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_edges_csv(&mut buf).expect("write to Vec");
        String::from_utf8(buf).expect("csv is ascii")
    }
}

/// Uniform zero-order-hold sampling of the edge list.
pub fn sample(
    waveform: &SwitchedWaveform,
    sample_rate: f64,
    n_periods: usize,
) -> Result<Vec<f64>, PwmError> {
    let f_m = 1.0 / waveform.period;
    let required = 20.0 * (waveform.max_carrier_hz() + f_m);
    if sample_rate < required {
        return Err(PwmError::UndersampledRate {
            actual: sample_rate,
            required,
        });
    }
    let count = (sample_rate * waveform.period * n_periods as f64).round() as usize;
    Ok((0..count)
        .map(|j| waveform.level_at(j as f64 / sample_rate))
        .collect())
}

/// SPWM baseline: fixed-frequency carrier at the integer carrier ratio,
/// sine modulator, same comparator and edge solver.
pub fn spwm_reference(config: &StrategyConfig) -> Result<SwitchedWaveform, PwmError> {
    if config.strategy != Strategy::Spwm {
        return Err(PwmError::InvalidConfig(format!(
            "spwm_reference requires the SPWM strategy, got {}",
            config.strategy
        )));
    }
    synthesize(config)
}

// ---------------------------------------------------------------------------
// Edge synthesis
// ---------------------------------------------------------------------------

const BISECT_XTOL: f64 = TAU * 1e-12;
const GRID_PER_CYCLE: f64 = 64.0;

struct Comparator<'a> {
    config: &'a StrategyConfig,
    law: Option<&'a CarrierLaw>,
}

impl Comparator<'_> {
    fn theta(&self, x: f64) -> f64 {
        match self.law {
            Some(law) => law.theta_at_phase(x),
            None => self.config.mean_order * x,
        }
    }

    /// Modulator minus carrier at modulator phase x; positive means +E/2.
    fn diff(&self, x: f64) -> f64 {
        self.config.modulator(x) - carrier_wave(self.theta(x))
    }
}

struct GapInfo {
    start: f64,
    /// Clamp level; None when the modulator is zero at the midpoint and
    /// the level must fall back to the comparator state at zone entry.
    clamp: Option<f64>,
    boundary_edges: usize,
    degenerate: bool,
}

/// Locate every modulator-carrier intersection and apply the frozen-zone
/// clamps, producing the exact ordered edge list over one period.
pub fn synthesize(config: &StrategyConfig) -> Result<SwitchedWaveform, PwmError> {
    let mut warnings = config.validate()?;
    let law = match config.strategy {
        Strategy::HipwmFmtc3 => Some(build_carrier_law(config)?),
        _ => None,
    };
    let max_order = config.max_carrier_order()?;
    let high = config.bus_e / 2.0;
    let low = -high;
    let cmp = Comparator {
        config,
        law: law.as_ref(),
    };

    // overmodulation scan
    let peak = (0..8192)
        .map(|i| config.modulator(TAU * i as f64 / 8192.0).abs())
        .fold(0.0_f64, f64::max);
    if peak > 1.0 + 1e-12 {
        warnings.push(Warning::Clipping { peak });
    }

    // active zones and the frozen gaps between them (cyclic)
    let zones: Vec<(f64, f64)> = match &law {
        Some(law) => law.zones.iter().map(|z| (z.start, z.end)).collect(),
        None => vec![(0.0, TAU)],
    };
    let nz = zones.len();
    let mut gaps: Vec<Option<GapInfo>> = Vec::with_capacity(nz);
    for i in 0..nz {
        let start = zones[i].1;
        let end = if i + 1 == nz {
            zones[0].0 + TAU
        } else {
            zones[i + 1].0
        };
        if law.is_some() && end - start > 1e-12 {
            let mid = (0.5 * (start + end)).rem_euclid(TAU);
            let h = config.modulator(mid);
            let clamp = if h.abs() > 1e-12 {
                Some(if h > 0.0 { high } else { low })
            } else {
                None
            };
            gaps.push(Some(GapInfo {
                start,
                clamp,
                boundary_edges: 0,
                degenerate: clamp.is_none(),
            }));
        } else {
            gaps.push(None);
        }
    }

    // initial level: gap clamp if x = 0 is frozen, comparator otherwise
    let wrap_gap_covers_zero = zones[0].0 > 1e-12;
    let mut pending_initial = false;
    let mut initial = if wrap_gap_covers_zero {
        match gaps[nz - 1].as_ref().and_then(|g| g.clamp) {
            Some(clamp) => clamp,
            None => {
                pending_initial = true;
                0.0
            }
        }
    } else if cmp.diff(0.0) > 0.0 {
        high
    } else {
        low
    };

    let level_of = |positive: bool| if positive { high } else { low };
    let dx = TAU / (GRID_PER_CYCLE * max_order.max(1.0));
    // bound on how far the comparator can move within one grid cell
    let mod_slope = match config.strategy {
        Strategy::Spwm => config.amplitude_index,
        _ => {
            config.amplitude_index
                * config
                    .injection
                    .iter()
                    .map(|&(h, c)| (h as f64 * c).abs())
                    .sum::<f64>()
        }
    };
    let cell_guard = 4.0 * (FRAC_2_PI * TAU / GRID_PER_CYCLE + mod_slope * dx);

    let mut edges_x: Vec<(f64, f64)> = Vec::new();
    let mut current = initial;

    for (zi, &(zs, ze)) in zones.iter().enumerate() {
        let cells = (((ze - zs) / dx).ceil() as usize).max(2);
        let node = |i: usize| zs + (ze - zs) * i as f64 / cells as f64;
        let d: Vec<f64> = (0..=cells).map(|i| cmp.diff(node(i))).collect();
        let pos: Vec<bool> = d.iter().map(|&v| v > 0.0).collect();

        let enter = level_of(pos[0]);
        if pending_initial {
            initial = enter;
            current = enter;
            pending_initial = false;
        }
        if enter != current && zs > 1e-12 {
            edges_x.push((zs, enter));
            current = enter;
            let prev = if zi == 0 { nz - 1 } else { zi - 1 };
            if let Some(g) = gaps[prev].as_mut() {
                g.boundary_edges += 1;
            }
        }

        for i in 0..cells {
            if pos[i] != pos[i + 1] {
                let root = bisect(|x| cmp.diff(x), node(i), node(i + 1), pos[i]);
                let lvl = level_of(pos[i + 1]);
                if lvl != current {
                    edges_x.push((root, lvl));
                    current = lvl;
                }
            } else if i > 0
                && pos[i - 1] == pos[i]
                && (d[i] - d[i - 1]) * (d[i + 1] - d[i]) < 0.0
                && d[i].abs() < cell_guard
            {
                // a crossing pair may graze inside this cell neighborhood:
                // pin the comparator extremum and re-bracket around it
                let maximize = d[i] > d[i - 1];
                let (xe, de) = extremum(|x| cmp.diff(x), node(i - 1), node(i + 1), maximize);
                if (de > 0.0) != pos[i] {
                    let r1 = bisect(|x| cmp.diff(x), node(i - 1), xe, pos[i - 1]);
                    let r2 = bisect(|x| cmp.diff(x), xe, node(i + 1), de > 0.0);
                    for (root, p) in [(r1, de > 0.0), (r2, pos[i + 1])] {
                        let lvl = level_of(p);
                        if lvl != current {
                            edges_x.push((root, lvl));
                            current = lvl;
                        }
                    }
                }
            }
        }

        if let Some(g) = gaps[zi].as_mut() {
            let clamp = match g.clamp {
                Some(c) => c,
                None => {
                    g.clamp = Some(current);
                    current
                }
            };
            if clamp != current {
                edges_x.push((g.start, clamp));
                current = clamp;
                g.boundary_edges += 1;
            }
        }
    }

    for (zi, g) in gaps.iter().enumerate() {
        if let Some(g) = g {
            if g.degenerate {
                warnings.push(Warning::DegenerateClampMidpoint { gap_index: zi });
            }
            if g.boundary_edges > 1 {
                warnings.push(Warning::FrozenZoneConflict {
                    gap_index: zi,
                    boundary_edges: g.boundary_edges,
                });
            }
        }
    }

    let omega_m = config.omega_m();
    let edges = edges_x
        .into_iter()
        .map(|(x, level)| Edge {
            time: x / omega_m,
            level,
        })
        .collect();

    Ok(SwitchedWaveform {
        period: config.period(),
        levels: (low, high),
        initial_level: initial,
        edges,
        meta: WaveformMeta {
            config: config.clone(),
            law,
            max_carrier_order: max_order,
            warnings,
        },
    })
}

/// Bisection on a bracketed sign change; `fa_pos` is the sign at `a`.
fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, fa_pos: bool) -> f64 {
    while b - a > BISECT_XTOL {
        let mid = 0.5 * (a + b);
        if (f(mid) > 0.0) == fa_pos {
            a = mid;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

/// Ternary search for a local extremum of `f` on [lo, hi].
fn extremum<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, maximize: bool) -> (f64, f64) {
    while hi - lo > BISECT_XTOL {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        let keep_right = if maximize {
            f(m1) < f(m2)
        } else {
            f(m1) > f(m2)
        };
        if keep_right {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}
