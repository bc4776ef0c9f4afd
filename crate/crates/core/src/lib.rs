//! Monte Carlo simulation of threshold-detector click statistics.
//!
//! A vector-valued complex Wiener process with a prescribed Hermitian
//! covariance `B` feeds a bank of per-channel threshold detectors. A channel
//! clicks whenever its energy `|phi_j|^2` first reaches the detection
//! threshold, and restarts from zero while the other channels run on. The
//! point of the exercise is that the resulting click statistics reproduce
//! the closed-form predictions of the normalized covariance `rho = B/Tr B`:
//! per-channel frequencies approach the diagonal `rho_jj`, mean inter-click
//! times approach `E_d/b_jj`, and the two-channel coincidence coefficient
//! `g2(0; tau)` stays below one and vanishes with the window.
//!
//! Modules follow the pipeline: [`linalg`] validates covariances and
//! factors them as `B = C C*`; [`process`] drives `phi = C W` with exact
//! Gaussian steps; [`detector`] turns energies into clicks; [`experiment`]
//! orchestrates runs and reduces logs; [`quantum`] holds the closed-form
//! predictions; [`config`] and [`report`] are the file-format layer used by
//! the `clicksim` binary.

pub mod config;
pub mod detector;
pub mod experiment;
pub mod linalg;
pub mod process;
pub mod quantum;
pub mod report;

pub use num_complex::Complex64;

pub use config::{parse_config, parse_config_str, ConfigError};
pub use detector::{
    single_channel_hitting_time, single_channel_hitting_time_bounded, ClickEvent, DetectorBank,
    DetectorError,
};
pub use experiment::{
    coincidence_count, detection_frequencies, g2_curve, g2_from_counts, hitting_time_stats,
    run_experiment, summarize, ClickLog, ExperimentConfig, ExperimentError, Normalization,
    TallyResult, ThresholdSpec,
};
pub use linalg::{
    cholesky_factor, real_decomposition, validate_covariance, verify_factor, CovarianceMatrix,
    FactorCheck, FactorMatrix, LinalgError, RealFactorPair,
};
pub use process::{
    advance, empirical_covariance, standard_complex_increment, CovarianceEstimate, FieldState,
    ProcessError, RngStream, StepParams,
};
pub use quantum::{
    born_probability, density_from_covariance, expected_clicks, expected_hitting_time,
    DensityMatrix, QuantumError,
};
pub use report::{cmd_g2, cmd_run, cmd_validate, CliError, RunReport};
