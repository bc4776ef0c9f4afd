//! C ABI for the clicksim library.
//!
//! Handles are opaque pointers created and destroyed by this library; every
//! fallible call returns a [`ClicksimStatus`] and writes its result through
//! an out pointer. The most recent failure message per thread is available
//! via [`clicksim_last_error_message`]. The generated header lives in
//! `include/clicksim.h`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::ptr;

use clicksim::config::{parse_config, parse_config_str, ConfigError};
use clicksim::experiment::{
    coincidence_count, detection_frequencies, g2_curve, run_experiment, ClickLog,
    ExperimentConfig, Normalization,
};
use clicksim::quantum::{born_probability, density_from_covariance};

/// Opaque handle to a parsed and validated experiment configuration.
pub struct ClicksimConfig {
    inner: ExperimentConfig,
}

/// Opaque handle to the click log of a completed run.
pub struct ClicksimLog {
    log: ClickLog,
    dt: f64,
}

/// Outcome of a C API call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClicksimStatus {
    /// Success.
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// Reading the configuration failed.
    Io = 3,
    /// The configuration is not valid JSON for the expected schema.
    Parse = 4,
    /// The configuration was rejected (covariance, factor, or fields).
    Invalid = 5,
    /// The simulation or a statistic could not be computed.
    Domain = 6,
    /// A channel index was out of range.
    OutOfRange = 7,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: impl AsRef<str>) {
    let owned = CString::new(message.as_ref().replace('\0', " "))
        .unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = owned);
}

fn config_status(err: &ConfigError) -> ClicksimStatus {
    match err {
        ConfigError::Io(_) => ClicksimStatus::Io,
        ConfigError::Parse { .. } => ClicksimStatus::Parse,
        _ => ClicksimStatus::Invalid,
    }
}

/// Version of the library as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn clicksim_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Copies the most recent error message of this thread into `buffer`
/// (truncated to `capacity` bytes including the NUL terminator) and returns
/// the full length of the message including the terminator. A null or empty
/// buffer queries the required capacity.
#[no_mangle]
pub unsafe extern "C" fn clicksim_last_error_message(
    buffer: *mut c_char,
    capacity: usize,
) -> usize {
    LAST_ERROR.with(|slot| {
        let message = slot.borrow();
        let bytes = message.as_bytes_with_nul();
        if !buffer.is_null() && capacity > 0 {
            let n = bytes.len().min(capacity - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buffer, n);
            *buffer.add(n) = 0;
        }
        bytes.len()
    })
}

unsafe fn write_config(
    parsed: Result<ExperimentConfig, ConfigError>,
    out: *mut *mut ClicksimConfig,
) -> ClicksimStatus {
    match parsed {
        Ok(inner) => {
            *out = Box::into_raw(Box::new(ClicksimConfig { inner }));
            ClicksimStatus::Ok
        }
        Err(err) => {
            set_error(err.to_string());
            config_status(&err)
        }
    }
}

/// Parses and validates a JSON configuration file.
#[no_mangle]
pub unsafe extern "C" fn clicksim_config_parse(
    path: *const c_char,
    out: *mut *mut ClicksimConfig,
) -> ClicksimStatus {
    if path.is_null() || out.is_null() {
        return ClicksimStatus::NullArgument;
    }
    *out = ptr::null_mut();
    let path = match CStr::from_ptr(path).to_str() {
        Ok(s) => s,
        Err(_) => {
            set_error("path is not valid UTF-8");
            return ClicksimStatus::InvalidUtf8;
        }
    };
    write_config(parse_config(Path::new(path)), out)
}

/// Parses and validates a configuration from a JSON string.
#[no_mangle]
pub unsafe extern "C" fn clicksim_config_parse_json(
    json: *const c_char,
    out: *mut *mut ClicksimConfig,
) -> ClicksimStatus {
    if json.is_null() || out.is_null() {
        return ClicksimStatus::NullArgument;
    }
    *out = ptr::null_mut();
    let json = match CStr::from_ptr(json).to_str() {
        Ok(s) => s,
        Err(_) => {
            set_error("config text is not valid UTF-8");
            return ClicksimStatus::InvalidUtf8;
        }
    };
    write_config(parse_config_str(json), out)
}

/// Releases a configuration handle. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn clicksim_config_free(config: *mut ClicksimConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Number of channels of the configured process.
#[no_mangle]
pub unsafe extern "C" fn clicksim_config_dim(
    config: *const ClicksimConfig,
    out: *mut u32,
) -> ClicksimStatus {
    if config.is_null() || out.is_null() {
        return ClicksimStatus::NullArgument;
    }
    *out = (*config).inner.covariance.dim() as u32;
    ClicksimStatus::Ok
}

/// Replaces the seed of a configuration.
#[no_mangle]
pub unsafe extern "C" fn clicksim_config_set_seed(
    config: *mut ClicksimConfig,
    seed: u64,
) -> ClicksimStatus {
    if config.is_null() {
        return ClicksimStatus::NullArgument;
    }
    (*config).inner.seed = seed;
    ClicksimStatus::Ok
}

/// Replaces the worker count of a configuration. Zero is rejected.
#[no_mangle]
pub unsafe extern "C" fn clicksim_config_set_workers(
    config: *mut ClicksimConfig,
    workers: u32,
) -> ClicksimStatus {
    if config.is_null() {
        return ClicksimStatus::NullArgument;
    }
    if workers == 0 {
        set_error("workers must be at least 1");
        return ClicksimStatus::Invalid;
    }
    (*config).inner.workers = workers as usize;
    ClicksimStatus::Ok
}

/// Resolved detection threshold of a configuration.
#[no_mangle]
pub unsafe extern "C" fn clicksim_config_threshold(
    config: *const ClicksimConfig,
    out: *mut f64,
) -> ClicksimStatus {
    if config.is_null() || out.is_null() {
        return ClicksimStatus::NullArgument;
    }
    *out = (*config).inner.resolved_threshold();
    ClicksimStatus::Ok
}

/// Predicted detection probability of `channel` for the configured
/// covariance.
#[no_mangle]
pub unsafe extern "C" fn clicksim_config_born(
    config: *const ClicksimConfig,
    channel: u32,
    out: *mut f64,
) -> ClicksimStatus {
    if config.is_null() || out.is_null() {
        return ClicksimStatus::NullArgument;
    }
    let rho = density_from_covariance(&(*config).inner.covariance);
    match born_probability(&rho, channel as usize) {
        Ok(p) => {
            *out = p;
            ClicksimStatus::Ok
        }
        Err(err) => {
            set_error(err.to_string());
            ClicksimStatus::OutOfRange
        }
    }
}

/// Runs the configured experiment and returns the click log.
#[no_mangle]
pub unsafe extern "C" fn clicksim_run(
    config: *const ClicksimConfig,
    out: *mut *mut ClicksimLog,
) -> ClicksimStatus {
    if config.is_null() || out.is_null() {
        return ClicksimStatus::NullArgument;
    }
    *out = ptr::null_mut();
    let cfg = &(*config).inner;
    match run_experiment(cfg) {
        Ok(log) => {
            *out = Box::into_raw(Box::new(ClicksimLog { log, dt: cfg.dt }));
            ClicksimStatus::Ok
        }
        Err(err) => {
            set_error(err.to_string());
            ClicksimStatus::Domain
        }
    }
}

/// Releases a log handle. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn clicksim_log_free(log: *mut ClicksimLog) {
    if !log.is_null() {
        drop(Box::from_raw(log));
    }
}

/// Number of channels in a log.
#[no_mangle]
pub unsafe extern "C" fn clicksim_log_channels(
    log: *const ClicksimLog,
    out: *mut u32,
) -> ClicksimStatus {
    if log.is_null() || out.is_null() {
        return ClicksimStatus::NullArgument;
    }
    *out = (*log).log.channel_count() as u32;
    ClicksimStatus::Ok
}

/// Total number of clicks across all channels.
#[no_mangle]
pub unsafe extern "C" fn clicksim_log_total(
    log: *const ClicksimLog,
    out: *mut u64,
) -> ClicksimStatus {
    if log.is_null() || out.is_null() {
        return ClicksimStatus::NullArgument;
    }
    *out = (*log).log.total();
    ClicksimStatus::Ok
}

/// Number of clicks in one channel.
#[no_mangle]
pub unsafe extern "C" fn clicksim_log_count(
    log: *const ClicksimLog,
    channel: u32,
    out: *mut u64,
) -> ClicksimStatus {
    if log.is_null() || out.is_null() {
        return ClicksimStatus::NullArgument;
    }
    let log = &(*log).log;
    if channel as usize >= log.channel_count() {
        set_error(format!(
            "channel {channel} out of range for {} channels",
            log.channel_count()
        ));
        return ClicksimStatus::OutOfRange;
    }
    *out = log.clicks(channel as usize).len() as u64;
    ClicksimStatus::Ok
}

/// Sum-normalized detection frequency of one channel.
#[no_mangle]
pub unsafe extern "C" fn clicksim_log_frequency(
    log: *const ClicksimLog,
    channel: u32,
    out: *mut f64,
) -> ClicksimStatus {
    if log.is_null() || out.is_null() {
        return ClicksimStatus::NullArgument;
    }
    let log = &(*log).log;
    if channel as usize >= log.channel_count() {
        set_error(format!(
            "channel {channel} out of range for {} channels",
            log.channel_count()
        ));
        return ClicksimStatus::OutOfRange;
    }
    match detection_frequencies(log, Normalization::Sum) {
        Ok(freq) => {
            *out = freq[channel as usize];
            ClicksimStatus::Ok
        }
        Err(err) => {
            set_error(err.to_string());
            ClicksimStatus::Domain
        }
    }
}

/// Coincidences between the two channels within `tau_steps`.
#[no_mangle]
pub unsafe extern "C" fn clicksim_log_coincidences(
    log: *const ClicksimLog,
    tau_steps: u64,
    out: *mut u64,
) -> ClicksimStatus {
    if log.is_null() || out.is_null() {
        return ClicksimStatus::NullArgument;
    }
    match coincidence_count(&(*log).log, tau_steps) {
        Ok(n12) => {
            *out = n12;
            ClicksimStatus::Ok
        }
        Err(err) => {
            set_error(err.to_string());
            ClicksimStatus::Domain
        }
    }
}

/// Second-order coherence at the given window.
#[no_mangle]
pub unsafe extern "C" fn clicksim_log_g2(
    log: *const ClicksimLog,
    tau_steps: u64,
    out: *mut f64,
) -> ClicksimStatus {
    if log.is_null() || out.is_null() {
        return ClicksimStatus::NullArgument;
    }
    match g2_curve(&(*log).log, &[tau_steps]) {
        Ok(points) => {
            *out = points[0].1;
            ClicksimStatus::Ok
        }
        Err(err) => {
            set_error(err.to_string());
            ClicksimStatus::Domain
        }
    }
}

/// Mean inter-click time of one channel, in physical time units.
#[no_mangle]
pub unsafe extern "C" fn clicksim_log_mean_interclick(
    log: *const ClicksimLog,
    channel: u32,
    out: *mut f64,
) -> ClicksimStatus {
    if log.is_null() || out.is_null() {
        return ClicksimStatus::NullArgument;
    }
    let handle = &*log;
    if channel as usize >= handle.log.channel_count() {
        set_error(format!(
            "channel {channel} out of range for {} channels",
            handle.log.channel_count()
        ));
        return ClicksimStatus::OutOfRange;
    }
    match clicksim::experiment::hitting_time_stats(&handle.log, handle.dt) {
        Ok(means) => {
            *out = means[channel as usize];
            ClicksimStatus::Ok
        }
        Err(err) => {
            set_error(err.to_string());
            ClicksimStatus::Domain
        }
    }
}
