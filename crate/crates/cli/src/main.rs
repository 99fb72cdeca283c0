//! `pwm-forge`: solve, synthesize, analyze, compare, sweep and tune PWM
//! strategies from the command line. Exit codes: 0 success, 2 on config or
//! validation problems, 3 on computation or output failures.

mod run_config;
mod svg;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use pwm_forge_core::config::{CarrierVariant, Strategy, StrategyConfig};
use pwm_forge_core::error::PwmError;
use pwm_forge_core::modulation::solve_amplitude;
use pwm_forge_core::sigfmt::fmt_sig;
use pwm_forge_core::spectrum::{fourier_from_edges, metrics_report, MetricsReport, Spectrum};
use pwm_forge_core::synthesis::{synthesize, SwitchedWaveform};
use pwm_forge_core::tuner::{minimize_band_energy, sweep};

use run_config::RunConfig;

const ENV_OUT: &str = "PWM_FORGE_OUT";

#[derive(Parser)]
#[command(name = "pwm-forge", version, about = "PWM waveform synthesis and spectral analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the closed-form carrier solution for (k, order)
    Solve(CommonOpts),
    /// Synthesize one period: waveform.csv + waveform.svg
    Synth(CommonOpts),
    /// Synthesize and analyze: spectrum.csv + spectrum.svg + metrics.txt
    Spectrum(CommonOpts),
    /// Run two configs side by side and flag the lower-THD one
    Compare {
        #[command(flatten)]
        opts: CommonOpts,
        /// Second config file; defaults to an SPWM baseline at the same
        /// order and bus voltage
        #[arg(long = "config-b")]
        config_b: Option<PathBuf>,
    },
    /// Metrics over a (k, mean-order) grid: sweep.csv
    Sweep(CommonOpts),
    /// Search k minimizing band energy: avoid.txt
    Avoid(CommonOpts),
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantOpt {
    Shifted,
    Literal,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyOpt {
    Spwm,
    HipwmFixed,
    HipwmFmtc3,
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// JSON run configuration; flags override file values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Truncation parameter in [0, 0.95]
    #[arg(long)]
    k: Option<f64>,
    /// Average modulation order
    #[arg(long)]
    order: Option<f64>,
    /// Modulator fundamental frequency, Hz
    #[arg(long)]
    fm: Option<f64>,
    /// DC bus voltage, V
    #[arg(long = "bus-e")]
    bus_e: Option<f64>,
    /// Carrier-law placement
    #[arg(long, value_enum)]
    variant: Option<VariantOpt>,
    /// Modulation strategy
    #[arg(long, value_enum)]
    strategy: Option<StrategyOpt>,
    /// Spectrum harmonic count
    #[arg(long)]
    nmax: Option<usize>,
    /// Output directory (falls back to $PWM_FORGE_OUT, then ./pwm-forge-out)
    #[arg(long)]
    out: Option<PathBuf>,
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn config(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }

    fn compute(message: impl Into<String>) -> Self {
        CliError {
            code: 3,
            message: message.into(),
        }
    }
}

impl From<PwmError> for CliError {
    fn from(e: PwmError) -> Self {
        match e {
            PwmError::InvalidConfig(_) => CliError::config(e.to_string()),
            _ => CliError::compute(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve(opts) => cmd_solve(opts),
        Command::Synth(opts) => cmd_synth(opts),
        Command::Spectrum(opts) => cmd_spectrum(opts),
        Command::Compare { opts, config_b } => cmd_compare(opts, config_b.as_deref()),
        Command::Sweep(opts) => cmd_sweep(opts),
        Command::Avoid(opts) => cmd_avoid(opts),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pwm-forge: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn effective_config(opts: &CommonOpts) -> Result<RunConfig, CliError> {
    let mut rc = match &opts.config {
        Some(path) => RunConfig::load(path).map_err(CliError::config)?,
        None => RunConfig::default(),
    };
    if let Some(k) = opts.k {
        rc.k = k;
    }
    if let Some(order) = opts.order {
        rc.mean_order = order;
    }
    if let Some(fm) = opts.fm {
        rc.f_m = fm;
    }
    if let Some(e) = opts.bus_e {
        rc.bus_e = e;
    }
    if let Some(v) = opts.variant {
        rc.carrier_variant = match v {
            VariantOpt::Shifted => CarrierVariant::Shifted,
            VariantOpt::Literal => CarrierVariant::Literal,
        };
    }
    if let Some(s) = opts.strategy {
        rc.strategy = match s {
            StrategyOpt::Spwm => Strategy::Spwm,
            StrategyOpt::HipwmFixed => Strategy::HipwmFixed,
            StrategyOpt::HipwmFmtc3 => Strategy::HipwmFmtc3,
        };
    }
    if let Some(n) = opts.nmax {
        rc.n_max = Some(n);
    }
    if let Some(out) = &opts.out {
        rc.out_dir = Some(out.clone());
    }
    Ok(rc)
}

fn resolve_out_dir(rc: &RunConfig) -> Result<PathBuf, CliError> {
    let dir = rc
        .out_dir
        .clone()
        .or_else(|| std::env::var_os(ENV_OUT).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("pwm-forge-out"));
    fs::create_dir_all(&dir)
        .map_err(|e| CliError::compute(format!("cannot create {}: {e}", dir.display())))?;
    Ok(dir)
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    fs::write(dir.join(name), contents)
        .map_err(|e| CliError::compute(format!("cannot write {name}: {e}")))
}

/// Echo the full effective configuration for reproducibility.
fn echo_config(dir: &Path, rc: &RunConfig) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(rc)
        .map_err(|e| CliError::compute(format!("cannot serialize config: {e}")))?;
    text.push('\n');
    write_file(dir, "config.json", &text)
}

fn warn_all(w: &SwitchedWaveform) {
    for warning in &w.meta.warnings {
        eprintln!("pwm-forge: warning: {warning}");
    }
}

fn cmd_solve(opts: &CommonOpts) -> Result<(), CliError> {
    let rc = effective_config(opts)?;
    let a = solve_amplitude(rc.k, rc.mean_order)?;
    let excursion = a * (1.0 - rc.k);
    let bounds = match rc.carrier_variant {
        CarrierVariant::Shifted => {
            let t1 = rc.k.sqrt().asin();
            [
                t1,
                std::f64::consts::PI - t1,
                std::f64::consts::PI + t1,
                std::f64::consts::TAU - t1,
            ]
        }
        CarrierVariant::Literal => {
            let b = rc.k.sqrt().acos();
            [
                b,
                std::f64::consts::PI - b,
                std::f64::consts::PI + b,
                std::f64::consts::TAU - b,
            ]
        }
    };
    println!("k = {}", fmt_sig(rc.k, 12));
    println!("mean_order = {}", fmt_sig(rc.mean_order, 12));
    println!("variant = {}", rc.carrier_variant);
    println!("A_over_wm = {}", fmt_sig(a, 12));
    println!("excursion_over_wm = {}", fmt_sig(excursion, 12));
    for (i, b) in bounds.iter().enumerate() {
        println!("t{}_rad = {}", i + 1, fmt_sig(*b, 12));
    }
    Ok(())
}

fn cmd_synth(opts: &CommonOpts) -> Result<(), CliError> {
    let rc = effective_config(opts)?;
    let dir = resolve_out_dir(&rc)?;
    let w = synthesize(&rc.strategy_config())?;
    warn_all(&w);
    write_file(&dir, "waveform.csv", &w.edges_csv_string())?;
    let title = format!(
        "{} f_m={} Hz, order {}, k={}",
        rc.strategy, rc.f_m, rc.mean_order, rc.k
    );
    write_file(&dir, "waveform.svg", &svg::waveform_svg(&w, &title))?;
    echo_config(&dir, &rc)?;
    println!("edges = {}", w.edge_count());
    println!("out_dir = {}", dir.display());
    Ok(())
}

/// Shared synth → spectrum → metrics pipeline.
fn analyze(
    cfg: &StrategyConfig,
    n_max: Option<usize>,
    bands: &[(f64, f64)],
) -> Result<(SwitchedWaveform, Spectrum, MetricsReport, usize), CliError> {
    let w = synthesize(cfg)?;
    let n = match n_max {
        Some(n) => n,
        None => cfg.default_n_max()?,
    };
    let sp = fourier_from_edges(&w, n);
    let metrics = metrics_report(&w, &sp, bands, n)?;
    Ok((w, sp, metrics, n))
}

fn metrics_text(rc: &RunConfig, m: &MetricsReport, n_max: usize, w: &SwitchedWaveform) -> String {
    let mut out = String::new();
    out.push_str(&format!("strategy = {}\n", rc.strategy));
    out.push_str(&format!("k = {}\n", fmt_sig(rc.k, 12)));
    out.push_str(&format!("mean_order = {}\n", fmt_sig(rc.mean_order, 12)));
    out.push_str(&format!("f_m_hz = {}\n", fmt_sig(rc.f_m, 12)));
    out.push_str(&format!("bus_e_v = {}\n", fmt_sig(rc.bus_e, 12)));
    out.push_str(&format!("n_max = {n_max}\n"));
    out.push_str(&format!("thd = {}\n", fmt_sig(m.thd, 12)));
    out.push_str(&format!("wthd = {}\n", fmt_sig(m.wthd, 12)));
    out.push_str(&format!("df = {}\n", fmt_sig(m.df, 12)));
    out.push_str(&format!("fundamental_v = {}\n", fmt_sig(m.fundamental, 12)));
    out.push_str(&format!("edge_count = {}\n", m.edge_count));
    for (i, (lo, hi, e)) in m.band_energies.iter().enumerate() {
        out.push_str(&format!("band_{i}_f_lo_hz = {}\n", fmt_sig(*lo, 12)));
        out.push_str(&format!("band_{i}_f_hi_hz = {}\n", fmt_sig(*hi, 12)));
        out.push_str(&format!("band_{i}_energy_v2 = {}\n", fmt_sig(*e, 12)));
    }
    for (i, warning) in w.meta.warnings.iter().enumerate() {
        out.push_str(&format!("warning_{i} = {warning}\n"));
    }
    out
}

fn cmd_spectrum(opts: &CommonOpts) -> Result<(), CliError> {
    let rc = effective_config(opts)?;
    let dir = resolve_out_dir(&rc)?;
    let (w, sp, metrics, n_max) = analyze(&rc.strategy_config(), rc.n_max, &rc.bands)?;
    warn_all(&w);
    write_file(&dir, "spectrum.csv", &sp.csv_string())?;
    let title = format!(
        "{} spectrum, order {}, k={}, N={}",
        rc.strategy, rc.mean_order, rc.k, n_max
    );
    write_file(&dir, "spectrum.svg", &svg::spectrum_svg(&sp, &title))?;
    write_file(&dir, "metrics.txt", &metrics_text(&rc, &metrics, n_max, &w))?;
    echo_config(&dir, &rc)?;
    println!("thd = {}", fmt_sig(metrics.thd, 12));
    println!("fundamental_v = {}", fmt_sig(metrics.fundamental, 12));
    println!("out_dir = {}", dir.display());
    Ok(())
}

/// Largest non-fundamental line outside the injected orders: where the
/// first carrier cluster actually peaks.
fn first_cluster_order(sp: &Spectrum, cfg: &StrategyConfig) -> usize {
    let skip: Vec<usize> = cfg.injection.iter().map(|&(h, _)| h as usize).collect();
    let mut best = 0;
    let mut best_mag = 0.0;
    for (i, l) in sp.lines.iter().enumerate() {
        let n = i + 1;
        if n == 1 || skip.contains(&n) {
            continue;
        }
        if l.magnitude > best_mag {
            best_mag = l.magnitude;
            best = n;
        }
    }
    best
}

fn cmd_compare(opts: &CommonOpts, config_b: Option<&Path>) -> Result<(), CliError> {
    let rc_a = effective_config(opts)?;
    let rc_b = match config_b {
        Some(path) => RunConfig::load(path).map_err(CliError::config)?,
        None => {
            // SPWM baseline at the same operating point
            let mut rc = rc_a.clone();
            rc.strategy = Strategy::Spwm;
            rc.k = 0.0;
            rc.amplitude_index = 1.0;
            rc
        }
    };
    let dir = resolve_out_dir(&rc_a)?;
    let cfg_a = rc_a.strategy_config();
    let cfg_b = rc_b.strategy_config();

    // a common harmonic count keeps the metrics comparable
    let n_max = match rc_a.n_max.or(rc_b.n_max) {
        Some(n) => n,
        None => cfg_a.default_n_max()?.max(cfg_b.default_n_max()?),
    };
    let (w_a, sp_a, m_a, _) = analyze(&cfg_a, Some(n_max), &rc_a.bands)?;
    let (w_b, sp_b, m_b, _) = analyze(&cfg_b, Some(n_max), &rc_a.bands)?;
    warn_all(&w_a);
    warn_all(&w_b);

    let exc = |cfg: &StrategyConfig| cfg.max_carrier_order().map_err(CliError::from);
    let rows: Vec<(String, String, String)> = vec![
        ("strategy".into(), cfg_a.strategy.to_string(), cfg_b.strategy.to_string()),
        ("k".into(), fmt_sig(cfg_a.k, 12), fmt_sig(cfg_b.k, 12)),
        (
            "mean_order".into(),
            fmt_sig(cfg_a.mean_order, 12),
            fmt_sig(cfg_b.mean_order, 12),
        ),
        (
            "max_carrier_order".into(),
            fmt_sig(exc(&cfg_a)?, 12),
            fmt_sig(exc(&cfg_b)?, 12),
        ),
        ("thd".into(), fmt_sig(m_a.thd, 12), fmt_sig(m_b.thd, 12)),
        ("wthd".into(), fmt_sig(m_a.wthd, 12), fmt_sig(m_b.wthd, 12)),
        ("df".into(), fmt_sig(m_a.df, 12), fmt_sig(m_b.df, 12)),
        (
            "fundamental_v".into(),
            fmt_sig(m_a.fundamental, 12),
            fmt_sig(m_b.fundamental, 12),
        ),
        (
            "edge_count".into(),
            m_a.edge_count.to_string(),
            m_b.edge_count.to_string(),
        ),
        (
            "first_cluster_order".into(),
            first_cluster_order(&sp_a, &cfg_a).to_string(),
            first_cluster_order(&sp_b, &cfg_b).to_string(),
        ),
    ];

    let lower = if (m_a.thd - m_b.thd).abs() < 1e-12 {
        "tie"
    } else if m_a.thd < m_b.thd {
        "a"
    } else {
        "b"
    };

    let mut csv = String::from("metric,config_a,config_b\n");
    for (name, a, b) in &rows {
        csv.push_str(&format!("{name},{a},{b}\n"));
    }
    csv.push_str(&format!("lower_thd,{lower},{lower}\n"));
    write_file(&dir, "compare.csv", &csv)?;
    echo_config(&dir, &rc_a)?;

    for (name, a, b) in &rows {
        println!("{name:<20} {a:>18} {b:>18}");
    }
    println!("lower_thd = {lower}");
    println!("out_dir = {}", dir.display());
    Ok(())
}

fn cmd_sweep(opts: &CommonOpts) -> Result<(), CliError> {
    let rc = effective_config(opts)?;
    let dir = resolve_out_dir(&rc)?;
    let result = sweep(
        &rc.strategy_config(),
        &rc.k_values,
        &rc.sweep_m_values(),
        rc.n_max,
        &rc.bands,
    );
    let failed = result.rows.iter().filter(|r| r.error.is_some()).count();
    write_file(&dir, "sweep.csv", &result.csv_string())?;
    echo_config(&dir, &rc)?;
    println!("rows = {}", result.rows.len());
    if failed > 0 {
        eprintln!("pwm-forge: warning: {failed} grid points failed; see the error column");
    }
    println!("out_dir = {}", dir.display());
    Ok(())
}

fn cmd_avoid(opts: &CommonOpts) -> Result<(), CliError> {
    let rc = effective_config(opts)?;
    let dir = resolve_out_dir(&rc)?;
    let search = minimize_band_energy(&rc.strategy_config(), &rc.bands, rc.k_range, rc.budget)?;

    let mut out = String::new();
    out.push_str(&format!("k_best = {}\n", fmt_sig(search.k_best, 12)));
    out.push_str(&format!("objective_v2 = {}\n", fmt_sig(search.objective, 12)));
    out.push_str(&format!("plateau = {}\n", search.plateau));
    out.push_str(&format!("thd = {}\n", fmt_sig(search.metrics.thd, 12)));
    out.push_str(&format!(
        "fundamental_v = {}\n",
        fmt_sig(search.metrics.fundamental, 12)
    ));
    for (i, &(lo, hi)) in rc.bands.iter().enumerate() {
        out.push_str(&format!(
            "band_{i} = {},{}\n",
            fmt_sig(lo, 12),
            fmt_sig(hi, 12)
        ));
    }
    out.push_str(&format!("evaluations = {}\n", search.evaluations.len()));
    for (i, &(k, obj)) in search.evaluations.iter().enumerate() {
        out.push_str(&format!(
            "eval_{i} = {},{}\n",
            fmt_sig(k, 12),
            fmt_sig(obj, 12)
        ));
    }
    write_file(&dir, "avoid.txt", &out)?;
    echo_config(&dir, &rc)?;
    println!("k_best = {}", fmt_sig(search.k_best, 12));
    println!("objective_v2 = {}", fmt_sig(search.objective, 12));
    println!("plateau = {}", search.plateau);
    println!("out_dir = {}", dir.display());
    Ok(())
}
