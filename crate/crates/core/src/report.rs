//! Machine-readable run outputs: the JSON summary report and the CSV files
//! consumed by plotting tools.
//!
//! CSV headers are fixed (`channel,step`, `channel,clicks,frequency,born,
//! abs_error`, `tau_steps,n1,n2,n12,g2`) and numbers are written with
//! shortest round-trip formatting, so identical runs produce byte-identical
//! files.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::config::{ComplexJson, ConfigError, ThresholdJson};
use crate::experiment::{
    run_experiment, summarize, ClickLog, ExperimentConfig, ExperimentError, ThresholdSpec,
};
use crate::linalg::{cholesky_factor, verify_factor};
use crate::quantum::{born_probability, density_from_covariance, expected_hitting_time};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Domain(#[from] ExperimentError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 1 for domain and validation failures, 2 for i/o failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(ConfigError::Io(_)) => 2,
            CliError::Config(_) => 1,
            CliError::Domain(_) => 1,
            CliError::Io(_) => 2,
        }
    }
}

/// Echo of the configuration a report belongs to.
#[derive(Debug, Serialize)]
pub struct ConfigEcho {
    pub dim: usize,
    pub covariance: Vec<Vec<ComplexJson>>,
    pub factor: Option<Vec<Vec<ComplexJson>>>,
    pub threshold: ThresholdJson,
    pub resolved_threshold: f64,
    pub dt: f64,
    pub horizon_steps: u64,
    pub tau_steps: Vec<u64>,
    pub seed: u64,
    pub workers: usize,
}

#[derive(Debug, Serialize)]
pub struct ChannelReport {
    pub channel: usize,
    pub clicks: u64,
    /// Sum-normalized relative frequency.
    pub frequency: f64,
    /// Predicted probability `rho_jj`.
    pub born: f64,
    pub abs_error: f64,
    /// Mean observed inter-click time; absent with fewer than two clicks.
    pub mean_interclick: Option<f64>,
    /// Predicted mean `E_d / b_jj`.
    pub expected_interclick: f64,
}

#[derive(Debug, Serialize)]
pub struct CoincidenceReport {
    pub tau_steps: u64,
    pub n12: u64,
    pub g2: f64,
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub config: ConfigEcho,
    pub total_clicks: u64,
    pub channels: Vec<ChannelReport>,
    /// Two-channel runs only.
    pub coincidences: Option<Vec<CoincidenceReport>>,
    pub wall_clock_seconds: f64,
    pub steps_per_second: f64,
}

fn grid_json(entries: &[num_complex::Complex64], dim: usize) -> Vec<Vec<ComplexJson>> {
    (0..dim)
        .map(|i| (0..dim).map(|j| entries[i * dim + j].into()).collect())
        .collect()
}

fn config_echo(cfg: &ExperimentConfig) -> ConfigEcho {
    let dim = cfg.covariance.dim();
    ConfigEcho {
        dim,
        covariance: grid_json(cfg.covariance.entries(), dim),
        factor: cfg.factor.as_ref().map(|f| grid_json(f.entries(), dim)),
        threshold: match cfg.threshold {
            ThresholdSpec::Absolute(absolute) => ThresholdJson::Absolute { absolute },
            ThresholdSpec::TraceFraction(trace_fraction) => {
                ThresholdJson::TraceFraction { trace_fraction }
            }
        },
        resolved_threshold: cfg.resolved_threshold(),
        dt: cfg.dt,
        horizon_steps: cfg.horizon_steps,
        tau_steps: cfg.tau_steps.clone(),
        seed: cfg.seed,
        workers: cfg.workers,
    }
}

fn mean_interclick(log: &ClickLog, channel: usize, dt: f64) -> Option<f64> {
    let clicks = log.clicks(channel);
    if clicks.len() < 2 {
        return None;
    }
    let span = (clicks[clicks.len() - 1] - clicks[0]) as f64;
    Some(span * dt / (clicks.len() - 1) as f64)
}

/// Writes `frequencies.csv`. Rows are omitted when the log is empty, the
/// header always present.
pub fn write_frequencies_csv(
    path: &Path,
    channels: &[ChannelReport],
    total_clicks: u64,
) -> Result<(), std::io::Error> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "channel,clicks,frequency,born,abs_error")?;
    if total_clicks > 0 {
        for ch in channels {
            writeln!(
                w,
                "{},{},{},{},{}",
                ch.channel, ch.clicks, ch.frequency, ch.born, ch.abs_error
            )?;
        }
    }
    w.flush()
}

/// Writes the flag-gated full click log as `clicks.csv`, one row per click
/// in chronological order.
pub fn write_clicks_csv(path: &Path, log: &ClickLog) -> Result<(), std::io::Error> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "channel,step")?;
    for event in log.iter_events() {
        writeln!(w, "{},{}", event.channel, event.step)?;
    }
    w.flush()
}

/// Writes `g2.csv`, one row per requested window.
pub fn write_g2_csv(
    path: &Path,
    n1: u64,
    n2: u64,
    rows: &[(u64, u64, f64)],
) -> Result<(), std::io::Error> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "tau_steps,n1,n2,n12,g2")?;
    for &(tau, n12, g2) in rows {
        writeln!(w, "{},{},{},{},{}", tau, n1, n2, n12, g2)?;
    }
    w.flush()
}

/// Checks the configured matrices and prints the predicted state without
/// simulating anything.
pub fn cmd_validate(cfg: &ExperimentConfig) -> Result<String, CliError> {
    let b = &cfg.covariance;
    let mut out = String::new();
    out.push_str(&format!("dim: {}\n", b.dim()));
    out.push_str(&format!("trace: {}\n", b.trace()));
    out.push_str(&format!(
        "hermitian_residual: {:.3e}\n",
        b.hermitian_residual()
    ));
    out.push_str(&format!(
        "threshold: {}\n",
        cfg.resolved_threshold()
    ));

    let factor = match &cfg.factor {
        Some(f) => {
            out.push_str("factor: supplied\n");
            f.clone()
        }
        None => {
            out.push_str("factor: cholesky\n");
            cholesky_factor(b).map_err(ExperimentError::from)?
        }
    };
    let check = verify_factor(&factor, b).map_err(ExperimentError::from)?;
    out.push_str(&format!(
        "factor_residual: {:.3e} (tolerance {:.3e})\n",
        check.max_residual, check.tolerance
    ));

    let rho = density_from_covariance(b);
    for j in 0..b.dim() {
        let p = born_probability(&rho, j).expect("channel in range");
        out.push_str(&format!("born[{j}]: {p:.6}\n"));
    }
    Ok(out)
}

/// Runs the configured experiment and writes `report.json`,
/// `frequencies.csv` and (optionally) `clicks.csv` into `out_dir`.
pub fn cmd_run(
    cfg: &ExperimentConfig,
    out_dir: &Path,
    emit_clicks: bool,
) -> Result<RunReport, CliError> {
    fs::create_dir_all(out_dir)?;
    let started = Instant::now();
    let log = run_experiment(cfg)?;
    let wall_clock_seconds = started.elapsed().as_secs_f64();

    let dim = cfg.covariance.dim();
    let threshold = cfg.resolved_threshold();
    let rho = density_from_covariance(&cfg.covariance);
    let counts = log.counts();
    let total_clicks = log.total();

    let frequencies: Vec<f64> = if total_clicks > 0 {
        counts
            .iter()
            .map(|&n| n as f64 / total_clicks as f64)
            .collect()
    } else {
        vec![0.0; dim]
    };

    let channels: Vec<ChannelReport> = (0..dim)
        .map(|j| {
            let born = born_probability(&rho, j).expect("channel in range");
            let frequency = frequencies[j];
            ChannelReport {
                channel: j,
                clicks: counts[j],
                frequency,
                born,
                abs_error: (frequency - born).abs(),
                mean_interclick: mean_interclick(&log, j, cfg.dt),
                expected_interclick: expected_hitting_time(
                    cfg.covariance.channel_power(j),
                    threshold,
                ),
            }
        })
        .collect();

    let coincidences = if dim == 2 && counts[0] > 0 && counts[1] > 0 {
        let tally = summarize(&log, &cfg.tau_steps)?;
        match (tally.coincidences, tally.g2) {
            (Some(n12s), Some(g2s)) => Some(
                n12s.iter()
                    .zip(&g2s)
                    .map(|(&(tau_steps, n12), &(_, g2))| CoincidenceReport {
                        tau_steps,
                        n12,
                        g2,
                    })
                    .collect(),
            ),
            _ => None,
        }
    } else {
        None
    };

    let report = RunReport {
        config: config_echo(cfg),
        total_clicks,
        channels,
        coincidences,
        wall_clock_seconds,
        steps_per_second: cfg.horizon_steps as f64 / wall_clock_seconds.max(1e-12),
    };

    write_frequencies_csv(
        &out_dir.join("frequencies.csv"),
        &report.channels,
        total_clicks,
    )?;
    if emit_clicks {
        write_clicks_csv(&out_dir.join("clicks.csv"), &log)?;
    }
    let json = File::create(out_dir.join("report.json"))?;
    serde_json::to_writer_pretty(BufWriter::new(json), &report)
        .map_err(|e| std::io::Error::other(e.to_string()))?;
    Ok(report)
}

/// Runs the experiment and writes the `g2.csv` window sweep. Two-channel
/// configurations only.
pub fn cmd_g2(cfg: &ExperimentConfig, out_dir: &Path) -> Result<(), CliError> {
    let dim = cfg.covariance.dim();
    if dim != 2 {
        return Err(ExperimentError::WrongChannelCount {
            expected: 2,
            got: dim,
        }
        .into());
    }
    fs::create_dir_all(out_dir)?;
    let log = run_experiment(cfg)?;
    let counts = log.counts();
    let (n1, n2) = (counts[0], counts[1]);
    if n1 == 0 || n2 == 0 {
        return Err(ExperimentError::DivisionByZero { n1, n2 }.into());
    }
    let tally = summarize(&log, &cfg.tau_steps)?;
    let n12s = tally.coincidences.expect("two channels");
    let g2s = tally.g2.expect("both channels clicked");
    let rows: Vec<(u64, u64, f64)> = n12s
        .iter()
        .zip(&g2s)
        .map(|(&(tau, n12), &(_, g2))| (tau, n12, g2))
        .collect();
    write_g2_csv(&out_dir.join("g2.csv"), n1, n2, &rows)?;
    Ok(())
}
