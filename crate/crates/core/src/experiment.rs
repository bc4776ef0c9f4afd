//! Full experiment runs: evolve the field, collect click logs, and reduce
//! them to detection frequencies, windowed coincidence counts, g2 curves and
//! inter-click statistics.
//!
//! Long horizons are split into fixed-length segments. Each segment is an
//! independent trajectory on its own rng stream starting from the zero
//! field, so the merged log depends only on the seed, never on the worker
//! count, and no boundary de-duplication is needed. A segment restart
//! discards at most one partial inter-click interval per channel, which is
//! far below statistical resolution for segments this long.

use rayon::prelude::*;
use thiserror::Error;

use crate::detector::{ClickEvent, DetectorBank, DetectorError};
use crate::linalg::{cholesky_factor, CovarianceMatrix, FactorMatrix, LinalgError};
use crate::process::{advance, FieldState, ProcessError, RngStream};

/// Steps per independent segment of a run.
pub const SEGMENT_LEN: u64 = 1 << 18;

#[derive(Debug, Error, PartialEq)]
pub enum ExperimentError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Process(#[from] ProcessError),
    #[error(transparent)]
    Detector(#[from] DetectorError),
    #[error("step size must be positive and finite, got {dt}")]
    InvalidStep { dt: f64 },
    #[error("at least one worker is required")]
    InvalidWorkers,
    #[error("resolved threshold must be positive and finite, got {threshold}")]
    InvalidThreshold { threshold: f64 },
    #[error("coincidence window {tau} exceeds horizon {horizon}")]
    WindowBeyondHorizon { tau: u64, horizon: u64 },
    #[error("log contains no clicks")]
    NoClicks,
    #[error("operation requires {expected} channels, log has {got}")]
    WrongChannelCount { expected: usize, got: usize },
    #[error("channel {channel} has {clicks} clicks, need at least 2")]
    InsufficientClicks { channel: usize, clicks: usize },
    #[error("g2 undefined: channel counts are {n1} and {n2}")]
    DivisionByZero { n1: u64, n2: u64 },
    #[error("click steps must be strictly increasing within channel {channel}")]
    UnsortedLog { channel: usize },
    #[error("worker pool failed: {0}")]
    ThreadPool(String),
}

/// Detection threshold, either absolute or as a fraction of the total
/// average power `Tr B`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdSpec {
    Absolute(f64),
    TraceFraction(f64),
}

impl ThresholdSpec {
    pub fn resolve(&self, trace: f64) -> f64 {
        match *self {
            ThresholdSpec::Absolute(value) => value,
            ThresholdSpec::TraceFraction(fraction) => fraction * trace,
        }
    }
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub covariance: CovarianceMatrix,
    /// Factor to drive the process with; `None` selects the Cholesky factor.
    pub factor: Option<FactorMatrix>,
    pub threshold: ThresholdSpec,
    pub dt: f64,
    pub horizon_steps: u64,
    pub tau_steps: Vec<u64>,
    pub seed: u64,
    pub workers: usize,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(ExperimentError::InvalidStep { dt: self.dt });
        }
        if self.workers == 0 {
            return Err(ExperimentError::InvalidWorkers);
        }
        let threshold = self.resolved_threshold();
        if !(threshold > 0.0) || !threshold.is_finite() {
            return Err(ExperimentError::InvalidThreshold { threshold });
        }
        if let Some(factor) = &self.factor {
            if factor.dim() != self.covariance.dim() {
                return Err(LinalgError::DimensionMismatch {
                    left: factor.dim(),
                    right: self.covariance.dim(),
                }
                .into());
            }
        }
        if self.horizon_steps > 0 {
            for &tau in &self.tau_steps {
                if tau > self.horizon_steps {
                    return Err(ExperimentError::WindowBeyondHorizon {
                        tau,
                        horizon: self.horizon_steps,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn resolved_threshold(&self) -> f64 {
        self.threshold.resolve(self.covariance.trace())
    }

    /// The factor that will drive the run: the supplied one, or the
    /// canonical Cholesky factor of the covariance.
    pub fn resolved_factor(&self) -> Result<FactorMatrix, ExperimentError> {
        match &self.factor {
            Some(factor) => Ok(factor.clone()),
            None => Ok(cholesky_factor(&self.covariance)?),
        }
    }
}

/// Per-channel ordered click steps from one run.
#[derive(Debug, Clone, PartialEq)]
pub struct ClickLog {
    channels: Vec<Vec<u64>>,
    horizon_steps: u64,
}

impl ClickLog {
    pub fn empty(channels: usize, horizon_steps: u64) -> Self {
        Self {
            channels: vec![Vec::new(); channels],
            horizon_steps,
        }
    }

    /// Builds a log from raw per-channel step lists, enforcing the
    /// strictly-increasing ordering invariant.
    pub fn from_channels(
        channels: Vec<Vec<u64>>,
        horizon_steps: u64,
    ) -> Result<Self, ExperimentError> {
        for (channel, clicks) in channels.iter().enumerate() {
            if clicks.windows(2).any(|w| w[0] >= w[1]) {
                return Err(ExperimentError::UnsortedLog { channel });
            }
        }
        Ok(Self {
            channels,
            horizon_steps,
        })
    }

    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }

    pub fn horizon_steps(&self) -> u64 {
        self.horizon_steps
    }

    pub fn clicks(&self, channel: usize) -> &[u64] {
        &self.channels[channel]
    }

    pub fn counts(&self) -> Vec<u64> {
        self.channels.iter().map(|c| c.len() as u64).collect()
    }

    pub fn total(&self) -> u64 {
        self.channels.iter().map(|c| c.len() as u64).sum()
    }

    /// All clicks in step order, for export.
    pub fn iter_events(&self) -> impl Iterator<Item = ClickEvent> + '_ {
        let mut events: Vec<ClickEvent> = self
            .channels
            .iter()
            .enumerate()
            .flat_map(|(channel, steps)| {
                steps.iter().map(move |&step| ClickEvent { channel, step })
            })
            .collect();
        events.sort_by_key(|e| (e.step, e.channel));
        events.into_iter()
    }
}

fn simulate_segment(
    factor: &FactorMatrix,
    threshold: f64,
    dt: f64,
    len: u64,
    offset: u64,
    seed: u64,
    segment: u64,
) -> Vec<Vec<u64>> {
    let m = factor.dim();
    let mut rng = RngStream::new(seed, segment);
    let mut state = FieldState::zero(m);
    let mut bank = DetectorBank::new(threshold, m).expect("validated threshold");
    let mut clicks = vec![Vec::new(); m];
    let mut events: Vec<ClickEvent> = Vec::with_capacity(m);
    for _ in 0..len {
        advance(&mut state, factor, &mut rng, dt).expect("validated dimensions");
        if bank.step_and_detect_into(&mut state, &mut events) > 0 {
            for event in events.drain(..) {
                clicks[event.channel].push(offset + event.step);
            }
        }
    }
    clicks
}

/// Runs the full experiment described by `cfg` and returns the merged click
/// log. Deterministic in `(seed)` alone: the worker count only changes how
/// segments are scheduled, not what they compute.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ClickLog, ExperimentError> {
    cfg.validate()?;
    let m = cfg.covariance.dim();
    if cfg.horizon_steps == 0 {
        return Ok(ClickLog::empty(m, 0));
    }
    let factor = cfg.resolved_factor()?;
    let threshold = cfg.resolved_threshold();
    let n_segments = cfg.horizon_steps.div_ceil(SEGMENT_LEN);

    let run_one = |k: u64| {
        let offset = k * SEGMENT_LEN;
        let len = SEGMENT_LEN.min(cfg.horizon_steps - offset);
        simulate_segment(&factor, threshold, cfg.dt, len, offset, cfg.seed, k)
    };

    let segments: Vec<Vec<Vec<u64>>> = if cfg.workers == 1 {
        (0..n_segments).map(run_one).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| ExperimentError::ThreadPool(e.to_string()))?;
        pool.install(|| (0..n_segments).into_par_iter().map(run_one).collect())
    };

    let mut channels = vec![Vec::new(); m];
    for segment in segments {
        for (channel, clicks) in segment.into_iter().enumerate() {
            channels[channel].extend(clicks);
        }
    }
    Ok(ClickLog {
        channels,
        horizon_steps: cfg.horizon_steps,
    })
}

/// How detection frequencies are normalized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Normalization {
    /// `N_j / sum_k N_k`.
    Sum,
    /// `N_j / (N_1 + N_2 - N_12(tau))`; two-channel logs only. Counting the
    /// plain sum takes every coincidence twice, so it is subtracted once.
    Coincidence { tau_steps: u64 },
}

/// Per-channel relative click frequencies under the chosen normalization.
pub fn detection_frequencies(
    log: &ClickLog,
    normalization: Normalization,
) -> Result<Vec<f64>, ExperimentError> {
    let counts = log.counts();
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(ExperimentError::NoClicks);
    }
    let denominator = match normalization {
        Normalization::Sum => total as f64,
        Normalization::Coincidence { tau_steps } => {
            let n12 = coincidence_count(log, tau_steps)?;
            (total - n12) as f64
        }
    };
    Ok(counts.iter().map(|&n| n as f64 / denominator).collect())
}

/// Number of coincidences between the two channels within a window of
/// `tau_steps`: clicks are scanned chronologically and each channel-0 click
/// is paired with the earliest unconsumed channel-1 click within the
/// window, one pair per click.
///
/// Because every window has the same width, earliest-unconsumed is also
/// earliest-deadline, so this greedy pairing attains the maximum matching.
pub fn coincidence_count(log: &ClickLog, tau_steps: u64) -> Result<u64, ExperimentError> {
    if log.channel_count() != 2 {
        return Err(ExperimentError::WrongChannelCount {
            expected: 2,
            got: log.channel_count(),
        });
    }
    Ok(greedy_match_count(log.clicks(0), log.clicks(1), tau_steps))
}

fn greedy_match_count(first: &[u64], second: &[u64], tau: u64) -> u64 {
    let mut next = 0usize;
    let mut pairs = 0u64;
    for &t1 in first {
        // Partners earlier than t1 - tau are lost to every later click too.
        while next < second.len() && second[next].saturating_add(tau) < t1 {
            next += 1;
        }
        if next < second.len() && second[next] <= t1.saturating_add(tau) {
            pairs += 1;
            next += 1;
        }
    }
    pairs
}

/// `g2(0; tau) = N12 (N1 + N2 - N12) / (N1 N2)` from raw counts.
pub fn g2_from_counts(n1: u64, n2: u64, n12: u64) -> Result<f64, ExperimentError> {
    if n1 == 0 || n2 == 0 {
        return Err(ExperimentError::DivisionByZero { n1, n2 });
    }
    let n12 = n12 as f64;
    Ok(n12 * (n1 as f64 + n2 as f64 - n12) / (n1 as f64 * n2 as f64))
}

/// The second-order coherence estimate for every requested window, in the
/// order given.
pub fn g2_curve(log: &ClickLog, tau_list: &[u64]) -> Result<Vec<(u64, f64)>, ExperimentError> {
    let counts = log.counts();
    if log.channel_count() != 2 {
        return Err(ExperimentError::WrongChannelCount {
            expected: 2,
            got: log.channel_count(),
        });
    }
    let (n1, n2) = (counts[0], counts[1]);
    if n1 == 0 || n2 == 0 {
        return Err(ExperimentError::DivisionByZero { n1, n2 });
    }
    tau_list
        .iter()
        .map(|&tau| {
            let n12 = coincidence_count(log, tau)?;
            Ok((tau, g2_from_counts(n1, n2, n12)?))
        })
        .collect()
}

/// Mean inter-click time per channel, in physical units.
pub fn hitting_time_stats(log: &ClickLog, dt: f64) -> Result<Vec<f64>, ExperimentError> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(ExperimentError::InvalidStep { dt });
    }
    let mut means = Vec::with_capacity(log.channel_count());
    for channel in 0..log.channel_count() {
        let clicks = log.clicks(channel);
        if clicks.len() < 2 {
            return Err(ExperimentError::InsufficientClicks {
                channel,
                clicks: clicks.len(),
            });
        }
        let span = (clicks[clicks.len() - 1] - clicks[0]) as f64;
        means.push(span * dt / (clicks.len() - 1) as f64);
    }
    Ok(means)
}

/// Reduced statistics of one run.
#[derive(Debug, Clone)]
pub struct TallyResult {
    /// Per-channel click counts.
    pub counts: Vec<u64>,
    /// `(tau, N12)` per requested window; two-channel logs only.
    pub coincidences: Option<Vec<(u64, u64)>>,
    /// Sum-normalized frequencies; they add to one.
    pub p_sum: Vec<f64>,
    /// Coincidence-normalized frequencies at the widest requested window;
    /// two-channel logs only.
    pub p_coincidence: Option<Vec<f64>>,
    /// `(tau, g2)` per requested window; two-channel logs with clicks in
    /// both channels only.
    pub g2: Option<Vec<(u64, f64)>>,
}

/// Reduces a log with at least one click to its summary statistics.
pub fn summarize(log: &ClickLog, tau_list: &[u64]) -> Result<TallyResult, ExperimentError> {
    let counts = log.counts();
    let p_sum = detection_frequencies(log, Normalization::Sum)?;

    let two_channel = log.channel_count() == 2;
    let coincidences = if two_channel {
        Some(
            tau_list
                .iter()
                .map(|&tau| Ok((tau, coincidence_count(log, tau)?)))
                .collect::<Result<Vec<_>, ExperimentError>>()?,
        )
    } else {
        None
    };
    let both_clicked = two_channel && counts[0] > 0 && counts[1] > 0;
    let g2 = if both_clicked {
        Some(g2_curve(log, tau_list)?)
    } else {
        None
    };
    let p_coincidence = match (&coincidences, tau_list.iter().max()) {
        (Some(_), Some(&widest)) => Some(detection_frequencies(
            log,
            Normalization::Coincidence { tau_steps: widest },
        )?),
        _ => None,
    };

    Ok(TallyResult {
        counts,
        coincidences,
        p_sum,
        p_coincidence,
        g2,
    })
}


#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    prop_compose! {
        fn click_channel(max_len: usize)(steps in prop::collection::btree_set(0u64..400, 0..max_len)) -> Vec<u64> {
            steps.into_iter().collect()
        }
    }

    proptest! {
        /// Widening the window never loses coincidences, and g2 inherits the
        /// monotonicity while N12 stays below half the smaller channel.
        #[test]
        fn g2_is_nondecreasing_in_the_window(
            ch0 in click_channel(24),
            ch1 in click_channel(24),
        ) {
            prop_assume!(!ch0.is_empty() && !ch1.is_empty());
            let n1 = ch0.len() as u64;
            let n2 = ch1.len() as u64;
            let log = ClickLog::from_channels(vec![ch0, ch1], 500).unwrap();
            let taus: Vec<u64> = (0..40).collect();
            let mut prev_n12 = 0u64;
            let mut prev_g2 = 0.0f64;
            for &tau in &taus {
                let n12 = coincidence_count(&log, tau).unwrap();
                prop_assert!(n12 >= prev_n12);
                prop_assert!(n12 <= n1.min(n2));
                if n12 < n1.min(n2).div_ceil(2) {
                    let g2 = g2_from_counts(n1, n2, n12).unwrap();
                    prop_assert!(g2 + 1e-12 >= prev_g2);
                    prev_g2 = g2;
                }
                prev_n12 = n12;
            }
        }

        /// Sum-normalized frequencies always add to one.
        #[test]
        fn frequencies_sum_to_one(
            ch0 in click_channel(24),
            ch1 in click_channel(24),
        ) {
            prop_assume!(!ch0.is_empty() || !ch1.is_empty());
            let log = ClickLog::from_channels(vec![ch0, ch1], 500).unwrap();
            let freq = detection_frequencies(&log, Normalization::Sum).unwrap();
            let total: f64 = freq.iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
            prop_assert!(freq.iter().all(|&f| (0.0..=1.0).contains(&f)));
        }
    }
}
