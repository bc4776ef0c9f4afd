//! JSON experiment configuration.
//!
//! Schema (UTF-8 JSON): complex numbers are `{"re": x, "im": y}` objects to
//! avoid string-parsing ambiguity, the threshold is either
//! `{"absolute": x}` or `{"trace_fraction": x}`, and `dt`, `tau_steps` and
//! `workers` have defaults. The covariance is validated on load and a
//! supplied factor must reproduce it.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::experiment::{ExperimentConfig, ExperimentError, ThresholdSpec};
use crate::linalg::{validate_covariance, verify_factor, FactorMatrix, LinalgError};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("config parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid covariance: {0}")]
    Validation(#[from] LinalgError),
    #[error("declared dim {declared} does not match {field} shape {actual}")]
    DimMismatch {
        declared: usize,
        field: &'static str,
        actual: usize,
    },
    #[error("supplied factor does not reproduce the covariance: residual {residual:.3e} exceeds {tolerance:.3e}")]
    FactorMismatch { residual: f64, tolerance: f64 },
    #[error("invalid field {field}: {message}")]
    InvalidField {
        field: &'static str,
        message: String,
    },
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
}

/// Complex number as serialized in configs and reports.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ComplexJson {
    pub re: f64,
    pub im: f64,
}

impl From<ComplexJson> for Complex64 {
    fn from(z: ComplexJson) -> Self {
        Complex64::new(z.re, z.im)
    }
}

impl From<Complex64> for ComplexJson {
    fn from(z: Complex64) -> Self {
        ComplexJson { re: z.re, im: z.im }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ThresholdJson {
    Absolute { absolute: f64 },
    TraceFraction { trace_fraction: f64 },
}

impl From<ThresholdJson> for ThresholdSpec {
    fn from(t: ThresholdJson) -> Self {
        match t {
            ThresholdJson::Absolute { absolute } => ThresholdSpec::Absolute(absolute),
            ThresholdJson::TraceFraction { trace_fraction } => {
                ThresholdSpec::TraceFraction(trace_fraction)
            }
        }
    }
}

fn default_dt() -> f64 {
    1e-3
}

fn default_tau_steps() -> Vec<u64> {
    vec![1, 2, 5, 10, 20, 50]
}

fn default_workers() -> usize {
    1
}

#[derive(Debug, Deserialize)]
struct RawConfig {
    dim: usize,
    covariance: Vec<Vec<ComplexJson>>,
    #[serde(default)]
    factor: Option<Vec<Vec<ComplexJson>>>,
    threshold: ThresholdJson,
    #[serde(default = "default_dt")]
    dt: f64,
    horizon_steps: u64,
    #[serde(default = "default_tau_steps")]
    tau_steps: Vec<u64>,
    seed: u64,
    #[serde(default = "default_workers")]
    workers: usize,
}

fn to_complex_rows(raw: &[Vec<ComplexJson>]) -> Vec<Vec<Complex64>> {
    raw.iter()
        .map(|row| row.iter().map(|&z| z.into()).collect())
        .collect()
}

fn check_shape(
    declared: usize,
    field: &'static str,
    rows: &[Vec<ComplexJson>],
) -> Result<(), ConfigError> {
    let square = rows.len() == declared && rows.iter().all(|r| r.len() == declared);
    if !square {
        let actual = rows
            .iter()
            .map(|r| r.len())
            .max()
            .unwrap_or(0)
            .max(rows.len());
        return Err(ConfigError::DimMismatch {
            declared,
            field,
            actual,
        });
    }
    Ok(())
}

/// Parses and fully validates a config from a JSON string.
pub fn parse_config_str(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let raw: RawConfig = serde_json::from_str(text).map_err(|e| ConfigError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;

    if raw.dim == 0 {
        return Err(ConfigError::InvalidField {
            field: "dim",
            message: "must be at least 1".into(),
        });
    }
    check_shape(raw.dim, "covariance", &raw.covariance)?;
    let covariance = validate_covariance(&to_complex_rows(&raw.covariance))?;

    let factor = match &raw.factor {
        Some(rows) => {
            check_shape(raw.dim, "factor", rows)?;
            let factor = FactorMatrix::from_rows(&to_complex_rows(rows))?;
            let check = verify_factor(&factor, &covariance)?;
            if !check.ok {
                return Err(ConfigError::FactorMismatch {
                    residual: check.max_residual,
                    tolerance: check.tolerance,
                });
            }
            Some(factor)
        }
        None => None,
    };

    match raw.threshold {
        ThresholdJson::Absolute { absolute } if !(absolute > 0.0) || !absolute.is_finite() => {
            return Err(ConfigError::InvalidField {
                field: "threshold.absolute",
                message: format!("must be positive and finite, got {absolute}"),
            });
        }
        ThresholdJson::TraceFraction { trace_fraction }
            if !(trace_fraction > 0.0) || !trace_fraction.is_finite() =>
        {
            return Err(ConfigError::InvalidField {
                field: "threshold.trace_fraction",
                message: format!("must be positive and finite, got {trace_fraction}"),
            });
        }
        _ => {}
    }

    let cfg = ExperimentConfig {
        covariance,
        factor,
        threshold: raw.threshold.into(),
        dt: raw.dt,
        horizon_steps: raw.horizon_steps,
        tau_steps: raw.tau_steps,
        seed: raw.seed,
        workers: raw.workers,
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Parses and fully validates a config file.
pub fn parse_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = fs::read_to_string(path)?;
    parse_config_str(&text)
}
