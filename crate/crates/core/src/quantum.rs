//! Closed-form predictions the simulation is checked against.
//!
//! The covariance normalized by its trace has every property of a density
//! matrix, and the detector eigenbasis is the coordinate basis here, so the
//! predicted detection probability of channel `j` is the diagonal element
//! `rho_jj = b_jj / Tr B`. Expected click counts and hitting times follow
//! from the mean first-passage time `E_d / sigma^2` of the channel energy.

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::CovarianceMatrix;

#[derive(Debug, Error, PartialEq)]
pub enum QuantumError {
    #[error("channel {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
}

/// Unit-trace Hermitian PSD matrix; the state assigned to a covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl DensityMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|j| self.entry(j, j).re).sum()
    }
}

/// `rho = B / Tr B`. Scale-invariant: any positive multiple of `B` maps to
/// the same state.
pub fn density_from_covariance(covariance: &CovarianceMatrix) -> DensityMatrix {
    // Validated covariances have strictly positive trace.
    let inv_trace = 1.0 / covariance.trace();
    DensityMatrix {
        dim: covariance.dim(),
        entries: covariance.entries().iter().map(|z| z * inv_trace).collect(),
    }
}

/// Detection probability of channel `j` in the detector basis: `rho_jj`.
pub fn born_probability(rho: &DensityMatrix, channel: usize) -> Result<f64, QuantumError> {
    if channel >= rho.dim() {
        return Err(QuantumError::IndexOutOfRange {
            index: channel,
            dim: rho.dim(),
        });
    }
    Ok(rho.entry(channel, channel).re)
}

/// Expected clicks of a channel with average power `channel_power` over a
/// run of `duration`: `b_jj T / E_d`.
pub fn expected_clicks(channel_power: f64, duration: f64, threshold: f64) -> f64 {
    channel_power * duration / threshold
}

/// Mean first-passage time of the channel energy to the threshold:
/// `E_d / sigma^2`.
pub fn expected_hitting_time(power: f64, threshold: f64) -> f64 {
    threshold / power
}
