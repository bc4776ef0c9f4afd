//! Threshold-detector bank.
//!
//! Every channel carries an identical threshold detector: it clicks at the
//! first step where the channel energy `|phi_j|^2` reaches the threshold,
//! after which that component restarts from zero (the field's mean) while
//! the joint correlated increments keep flowing into all channels. Detectors
//! are ideal: no dead time, no dark counts, unit efficiency.

use thiserror::Error;

use crate::process::{FieldState, RngStream};

/// Guard on hitting-time simulations so a misconfigured threshold cannot
/// spin forever.
pub const MAX_HITTING_STEPS: u64 = 1_000_000_000;

#[derive(Debug, Error, PartialEq)]
pub enum DetectorError {
    #[error("signal power must be positive and finite, got {sigma2}")]
    InvalidPower { sigma2: f64 },
    #[error("detection threshold must be positive and finite, got {threshold}")]
    InvalidThreshold { threshold: f64 },
    #[error("step size must be positive and finite, got {dt}")]
    InvalidStep { dt: f64 },
    #[error("detector bank needs at least one channel")]
    ZeroChannels,
    #[error("no threshold crossing within {limit} steps")]
    MaxStepsExceeded { limit: u64 },
}

/// A detection: channel `channel` clicked at step `step` (time `step * dt`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClickEvent {
    pub channel: usize,
    pub step: u64,
}

/// Bank of independent threshold detectors, one per channel, sharing one
/// threshold. Bound to a single trajectory; click logs from parallel
/// trajectories are merged after the runs complete.
#[derive(Debug, Clone)]
pub struct DetectorBank {
    threshold: f64,
    last_click: Vec<Option<u64>>,
}

impl DetectorBank {
    pub fn new(threshold: f64, channels: usize) -> Result<Self, DetectorError> {
        if !(threshold > 0.0) || !threshold.is_finite() {
            return Err(DetectorError::InvalidThreshold { threshold });
        }
        if channels == 0 {
            return Err(DetectorError::ZeroChannels);
        }
        Ok(Self {
            threshold,
            last_click: vec![None; channels],
        })
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn channels(&self) -> usize {
        self.last_click.len()
    }

    /// Step index of the most recent click on `channel`, if any.
    pub fn last_click(&self, channel: usize) -> Option<u64> {
        self.last_click[channel]
    }

    /// Examines the freshly advanced field: every channel whose energy
    /// reaches the threshold clicks at this step (simultaneous clicks are
    /// all registered) and is then reset. Returns the number of clicks
    /// appended to `out`.
    #[inline]
    pub fn step_and_detect_into(
        &mut self,
        state: &mut FieldState,
        out: &mut Vec<ClickEvent>,
    ) -> usize {
        debug_assert_eq!(state.dim(), self.channels());
        let mut clicks = 0;
        for channel in 0..self.last_click.len() {
            if state.energy(channel) >= self.threshold {
                let step = state.step_index;
                if let Some(prev) = self.last_click[channel] {
                    debug_assert!(step > prev, "clicks must be strictly increasing");
                }
                out.push(ClickEvent { channel, step });
                self.reset_channel(state, channel);
                clicks += 1;
            }
        }
        clicks
    }

    /// Allocating convenience wrapper around [`Self::step_and_detect_into`].
    pub fn step_and_detect(&mut self, state: &mut FieldState) -> Vec<ClickEvent> {
        let mut out = Vec::new();
        self.step_and_detect_into(state, &mut out);
        out
    }

    /// Restarts channel `channel` after a click: its component returns to
    /// the field mean (zero) while the other components are untouched.
    pub fn reset_channel(&mut self, state: &mut FieldState, channel: usize) {
        self.last_click[channel] = Some(state.step_index);
        state.phi[channel] = num_complex::Complex64::new(0.0, 0.0);
    }
}

/// First time the energy of a scalar complex Wiener process with average
/// power `sigma2` reaches `threshold`, in units of `dt` steps from a zero
/// start, with an explicit step budget.
///
/// The continuous-time mean is `threshold / sigma2`. Crossings are only
/// observed at step granularity, which biases the estimate high by
/// O(sqrt(dt)); `dt <= threshold / (200 * sigma2)` keeps single-percent
/// territory in reach but tight tolerances need finer steps.
pub fn single_channel_hitting_time_bounded(
    sigma2: f64,
    threshold: f64,
    dt: f64,
    rng: &mut RngStream,
    max_steps: u64,
) -> Result<f64, DetectorError> {
    if !(sigma2 > 0.0) || !sigma2.is_finite() {
        return Err(DetectorError::InvalidPower { sigma2 });
    }
    if !(threshold > 0.0) || !threshold.is_finite() {
        return Err(DetectorError::InvalidThreshold { threshold });
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(DetectorError::InvalidStep { dt });
    }
    let scaled_dt = sigma2 * dt;
    let mut phi = num_complex::Complex64::new(0.0, 0.0);
    for step in 1..=max_steps {
        phi += rng.standard_complex(scaled_dt);
        if phi.norm_sqr() >= threshold {
            return Ok(step as f64 * dt);
        }
    }
    Err(DetectorError::MaxStepsExceeded { limit: max_steps })
}

/// [`single_channel_hitting_time_bounded`] with the default
/// [`MAX_HITTING_STEPS`] budget.
pub fn single_channel_hitting_time(
    sigma2: f64,
    threshold: f64,
    dt: f64,
    rng: &mut RngStream,
) -> Result<f64, DetectorError> {
    single_channel_hitting_time_bounded(sigma2, threshold, dt, rng, MAX_HITTING_STEPS)
}
