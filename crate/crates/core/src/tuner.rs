//! Parameter exploration: grid sweeps of (k, M̄) through the full
//! synth → spectrum → metrics pipeline, and a derivative-free search for
//! the k that minimizes spectral energy inside user-declared forbidden
//! bands. Golden-section is used for refinement: spectral lines cross band
//! edges discretely as k moves, so the objective is piecewise-smooth with
//! kinks and gradients are unreliable.

use serde::{Deserialize, Serialize};
use std::io::{self, Write};

use crate::config::{Strategy, StrategyConfig, K_MAX};
use crate::error::PwmError;
use crate::modulation::solve_amplitude;
use crate::sigfmt::fmt_sci;
use crate::spectrum::{band_energy, fourier_from_edges, metrics_report, MetricsReport};
use crate::synthesis::synthesize;

/// One grid point of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub k: f64,
    pub mean_order: f64,
    pub a_over_wm: f64,
    pub thd: f64,
    pub wthd: f64,
    pub df: f64,
    pub fundamental: f64,
    pub edge_count: usize,
    pub band_energies: Vec<f64>,
    /// Per-point failure, with the rest of the sweep unaffected.
    pub error: Option<String>,
}

/// Sweep output, ordered by (mean order, k).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub bands: Vec<(f64, f64)>,
}

impl SweepResult {
    /// CSV: `k,mean_order,A_over_wm,thd,wthd,df,fundamental,edge_count,band_0,...,error`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        write!(w, "k,mean_order,A_over_wm,thd,wthd,df,fundamental,edge_count")?;
        for i in 0..self.bands.len() {
            write!(w, ",band_{i}")?;
        }
        writeln!(w, ",error")?;
        for r in &self.rows {
            write!(
                w,
                "{},{},{},{},{},{},{},{}",
                fmt_sci(r.k, 12),
                fmt_sci(r.mean_order, 12),
                fmt_sci(r.a_over_wm, 12),
                fmt_sci(r.thd, 12),
                fmt_sci(r.wthd, 12),
                fmt_sci(r.df, 12),
                fmt_sci(r.fundamental, 12),
                r.edge_count
            )?;
            for e in &r.band_energies {
                write!(w, ",{}", fmt_sci(*e, 12))?;
            }
            let err = r
                .error
                .as_deref()
                .unwrap_or("")
                .replace(',', ";");
            writeln!(w, ",{err}")?;
        }
        Ok(())
    }

    pub fn csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("write to Vec");
        String::from_utf8(buf).expect("csv is ascii")
    }
}

fn point_config(template: &StrategyConfig, k: f64, mean_order: f64) -> StrategyConfig {
    let mut cfg = template.clone();
    cfg.k = k;
    cfg.mean_order = mean_order;
    cfg
}

fn evaluate_point(
    cfg: &StrategyConfig,
    n_max: Option<usize>,
    bands: &[(f64, f64)],
) -> Result<(MetricsReport, f64), PwmError> {
    let waveform = synthesize(cfg)?;
    // the table must reach every requested band edge
    let min_lines = bands
        .iter()
        .map(|&(_, hi)| (hi / cfg.f_m).ceil() as usize + 1)
        .max()
        .unwrap_or(0);
    let n_spectrum = n_max.unwrap_or(cfg.default_n_max()?).max(min_lines);
    let spectrum = fourier_from_edges(&waveform, n_spectrum);
    let metrics = metrics_report(&waveform, &spectrum, bands, n_max.unwrap_or(n_spectrum))?;
    let a_over_wm = match cfg.strategy {
        Strategy::HipwmFmtc3 => solve_amplitude(cfg.k, cfg.mean_order)?,
        _ => cfg.mean_order,
    };
    Ok((metrics, a_over_wm))
}

/// Full pipeline per grid point. Per-point errors become row markers and
/// the sweep continues; identical inputs produce bit-identical output.
pub fn sweep(
    template: &StrategyConfig,
    k_values: &[f64],
    m_values: &[f64],
    n_max: Option<usize>,
    bands: &[(f64, f64)],
) -> SweepResult {
    let mut ms = m_values.to_vec();
    ms.sort_by(f64::total_cmp);
    let mut ks = k_values.to_vec();
    ks.sort_by(f64::total_cmp);

    let mut rows = Vec::with_capacity(ms.len() * ks.len());
    for &m in &ms {
        for &k in &ks {
            let cfg = point_config(template, k, m);
            let row = match evaluate_point(&cfg, n_max, bands) {
                Ok((metrics, a_over_wm)) => SweepRow {
                    k,
                    mean_order: m,
                    a_over_wm,
                    thd: metrics.thd,
                    wthd: metrics.wthd,
                    df: metrics.df,
                    fundamental: metrics.fundamental,
                    edge_count: metrics.edge_count,
                    band_energies: metrics.band_energies.iter().map(|&(_, _, e)| e).collect(),
                    error: None,
                },
                Err(e) => SweepRow {
                    k,
                    mean_order: m,
                    a_over_wm: 0.0,
                    thd: 0.0,
                    wthd: 0.0,
                    df: 0.0,
                    fundamental: 0.0,
                    edge_count: 0,
                    band_energies: vec![0.0; bands.len()],
                    error: Some(e.to_string()),
                },
            };
            rows.push(row);
        }
    }
    SweepResult {
        rows,
        bands: bands.to_vec(),
    }
}

/// Outcome of a band-energy search over k.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandSearch {
    pub k_best: f64,
    /// Total band energy at `k_best`, V².
    pub objective: f64,
    pub metrics: MetricsReport,
    /// Every (k, objective) pair evaluated, in evaluation order.
    pub evaluations: Vec<(f64, f64)>,
    /// The coarse grid saw less than 10% relative spread: the objective is
    /// insensitive to k over this range.
    pub plateau: bool,
}

/// Search k in `k_range` minimizing the summed band energy: a coarse grid
/// of budget/2 points, then golden-section refinement on the best bracket.
/// Ties break toward smaller k (smaller switching-frequency excursion).
/// Never returns a point worse than the best coarse-grid point.
pub fn minimize_band_energy(
    template: &StrategyConfig,
    bands: &[(f64, f64)],
    k_range: (f64, f64),
    budget: usize,
) -> Result<BandSearch, PwmError> {
    let (lo, hi) = k_range;
    if !(0.0..=K_MAX).contains(&lo) || !(0.0..=K_MAX).contains(&hi) || lo > hi {
        return Err(PwmError::InvalidConfig(format!(
            "k range [{lo}, {hi}] must lie within [0, {K_MAX}]"
        )));
    }
    if budget < 8 {
        return Err(PwmError::InvalidConfig(format!(
            "search budget must be at least 8 evaluations, got {budget}"
        )));
    }
    let mut sorted = bands.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    for w in sorted.windows(2) {
        if w[0].1 > w[1].0 {
            return Err(PwmError::InvalidConfig(format!(
                "bands [{}, {}] and [{}, {}] overlap",
                w[0].0, w[0].1, w[1].0, w[1].1
            )));
        }
    }
    for &(blo, bhi) in bands {
        if blo >= bhi {
            return Err(PwmError::InvalidConfig(format!(
                "band [{blo}, {bhi}] must have f_lo < f_hi"
            )));
        }
    }

    let mut evaluations = Vec::with_capacity(budget);
    let mut eval = |k: f64| -> Result<f64, PwmError> {
        let cfg = point_config(template, k, template.mean_order);
        let waveform = synthesize(&cfg)?;
        let min_lines = bands
            .iter()
            .map(|&(_, b)| (b / cfg.f_m).ceil() as usize + 1)
            .max()
            .unwrap_or(1);
        let spectrum = fourier_from_edges(&waveform, cfg.default_n_max()?.max(min_lines));
        let objective = band_energy(&spectrum, bands).iter().sum::<f64>();
        evaluations.push((k, objective));
        Ok(objective)
    };

    // coarse pass
    let n_coarse = (budget / 2).max(2);
    let mut best_i = 0;
    let mut coarse: Vec<(f64, f64)> = Vec::with_capacity(n_coarse);
    for i in 0..n_coarse {
        let k = if hi > lo {
            lo + (hi - lo) * i as f64 / (n_coarse - 1) as f64
        } else {
            lo
        };
        let obj = eval(k)?;
        coarse.push((k, obj));
        if obj < coarse[best_i].1 {
            best_i = i;
        }
        if hi == lo {
            break;
        }
    }
    let objs: Vec<f64> = coarse.iter().map(|&(_, o)| o).collect();
    let omax = objs.iter().cloned().fold(f64::MIN, f64::max);
    let omin = objs.iter().cloned().fold(f64::MAX, f64::min);
    let plateau = omax <= 0.0 || (omax - omin) <= 0.10 * omax;

    // golden-section refinement on the bracket around the coarse winner
    let mut remaining = budget.saturating_sub(coarse.len());
    if remaining >= 2 && hi > lo {
        let a = coarse[best_i.saturating_sub(1)].0;
        let b = coarse[(best_i + 1).min(coarse.len() - 1)].0;
        if b > a {
            const INV_PHI: f64 = 0.618_033_988_749_894_9;
            let mut lo_b = a;
            let mut hi_b = b;
            let mut x1 = hi_b - INV_PHI * (hi_b - lo_b);
            let mut x2 = lo_b + INV_PHI * (hi_b - lo_b);
            let mut f1 = eval(x1)?;
            let mut f2 = eval(x2)?;
            remaining = remaining.saturating_sub(2);
            while remaining > 0 {
                if f1 < f2 {
                    hi_b = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = hi_b - INV_PHI * (hi_b - lo_b);
                    f1 = eval(x1)?;
                } else {
                    lo_b = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = lo_b + INV_PHI * (hi_b - lo_b);
                    f2 = eval(x2)?;
                }
                remaining -= 1;
            }
        }
    }

    // global winner across every evaluation; ties toward smaller k
    let mut k_best = evaluations[0].0;
    let mut best = evaluations[0].1;
    for &(k, obj) in &evaluations[1..] {
        if obj < best || (obj == best && k < k_best) {
            best = obj;
            k_best = k;
        }
    }

    let cfg = point_config(template, k_best, template.mean_order);
    let waveform = synthesize(&cfg)?;
    let min_lines = bands
        .iter()
        .map(|&(_, b)| (b / cfg.f_m).ceil() as usize + 1)
        .max()
        .unwrap_or(1);
    let n_spectrum = cfg.default_n_max()?.max(min_lines);
    let spectrum = fourier_from_edges(&waveform, n_spectrum);
    let metrics = metrics_report(&waveform, &spectrum, bands, n_spectrum)?;

    Ok(BandSearch {
        k_best,
        objective: best,
        metrics,
        evaluations,
        plateau,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn template() -> StrategyConfig {
        StrategyConfig::fmtc3(50.0, 15.0, 0.5, 400.0)
    }

    #[test]
    fn single_point_sweeps_match_known_rows() {
        let r = sweep(&template(), &[0.0], &[15.0], Some(100), &[]);
        assert_eq!(r.rows.len(), 1);
        assert!((r.rows[0].a_over_wm - 30.0).abs() < 1e-9);
        assert!((r.rows[0].thd - 0.570368).abs() < 1e-4);
        assert_eq!(r.rows[0].edge_count, 30);

        let r = sweep(&template(), &[0.5], &[15.0], Some(100), &[]);
        assert!((r.rows[0].a_over_wm - 94.2478).abs() < 1e-3);
    }

    #[test]
    fn empty_grid_gives_empty_result() {
        let r = sweep(&template(), &[], &[15.0], None, &[]);
        assert!(r.rows.is_empty());
    }

    #[test]
    fn grid_errors_are_row_markers() {
        // k outside the validated domain poisons only its own row
        let r = sweep(&template(), &[0.5, 0.97], &[15.0], Some(100), &[]);
        assert_eq!(r.rows.len(), 2);
        assert!(r.rows[0].error.is_none());
        assert!(r.rows[1].error.is_some());
    }

    #[test]
    fn excursion_increases_with_k() {
        let ks: Vec<f64> = (0..10).map(|i| i as f64 * 0.1).collect();
        let r = sweep(&template(), &ks, &[15.0], Some(100), &[]);
        for w in r.rows.windows(2) {
            let e0 = w[0].a_over_wm * (1.0 - w[0].k);
            let e1 = w[1].a_over_wm * (1.0 - w[1].k);
            assert!(e1 > e0, "excursion not increasing: {e0} -> {e1}");
        }
    }

    #[test]
    fn sweep_is_deterministic() {
        let ks = [0.0, 0.3, 0.6];
        let a = sweep(&template(), &ks, &[9.0, 15.0], None, &[(500.0, 1250.0)]);
        let b = sweep(&template(), &ks, &[9.0, 15.0], None, &[(500.0, 1250.0)]);
        assert_eq!(a.csv_string(), b.csv_string());
    }

    #[test]
    fn csv_layout() {
        let r = sweep(&template(), &[0.5], &[15.0], Some(100), &[(500.0, 1250.0)]);
        let csv = r.csv_string();
        assert!(csv.starts_with(
            "k,mean_order,A_over_wm,thd,wthd,df,fundamental,edge_count,band_0,error\n"
        ));
    }

    #[test]
    fn empty_bands_minimize_returns_range_floor() {
        let s = minimize_band_energy(&template(), &[], (0.2, 0.8), 8).unwrap();
        assert_eq!(s.k_best, 0.2);
        assert_eq!(s.objective, 0.0);
        assert!(s.plateau);
    }

    #[test]
    fn fundamental_band_is_a_plateau() {
        let s = minimize_band_energy(&template(), &[(25.0, 75.0)], (0.0, 0.9), 12).unwrap();
        assert!(s.plateau, "objective spread {:?}", s.evaluations);
        // objective is about half the squared fundamental
        assert!(s.objective > 26_000.0 && s.objective < 32_000.0);
    }

    #[test]
    fn forbidden_band_moves_energy_out() {
        let s =
            minimize_band_energy(&template(), &[(500.0, 1250.0)], (0.0, 0.9), 24).unwrap();
        assert!(!s.plateau);
        let at_zero = s
            .evaluations
            .iter()
            .find(|(k, _)| *k == 0.0)
            .expect("coarse grid includes the range floor")
            .1;
        assert!(s.objective < at_zero, "{} vs {at_zero}", s.objective);
        // never worse than the best coarse or refined evaluation
        let best_eval = s
            .evaluations
            .iter()
            .map(|&(_, o)| o)
            .fold(f64::MAX, f64::min);
        assert!(s.objective <= best_eval + 1e-12);
    }

    #[test]
    fn budget_and_band_validation() {
        assert!(minimize_band_energy(&template(), &[], (0.0, 0.9), 7).is_err());
        assert!(minimize_band_energy(&template(), &[], (0.0, 0.96), 8).is_err());
        assert!(
            minimize_band_energy(&template(), &[(100.0, 50.0)], (0.0, 0.9), 8).is_err()
        );
        assert!(minimize_band_energy(
            &template(),
            &[(100.0, 300.0), (200.0, 400.0)],
            (0.0, 0.9),
            8
        )
        .is_err());
    }
}
