//! Exercises the C entry points end to end against the core library.

use std::ffi::{CStr, CString};
use std::io::Write;
use std::ptr;

use clicksim_ffi::*;

const CONFIG_JSON: &str = r#"{
    "dim": 2,
    "covariance": [
        [{"re": 10.0, "im": 0.0}, {"re": 5.0, "im": 2.0}],
        [{"re": 5.0, "im": -2.0}, {"re": 9.0, "im": 0.0}]
    ],
    "threshold": {"trace_fraction": 0.05},
    "dt": 0.001,
    "horizon_steps": 100000,
    "tau_steps": [0, 1, 5],
    "seed": 31,
    "workers": 1
}"#;

fn last_error() -> String {
    let mut buf = vec![0i8; 512];
    unsafe {
        clicksim_last_error_message(buf.as_mut_ptr() as *mut _, buf.len());
        CStr::from_ptr(buf.as_ptr() as *const _)
            .to_string_lossy()
            .into_owned()
    }
}

#[test]
fn parse_run_and_query_statistics() {
    let json = CString::new(CONFIG_JSON).unwrap();
    let mut cfg: *mut ClicksimConfig = ptr::null_mut();
    unsafe {
        assert_eq!(
            clicksim_config_parse_json(json.as_ptr(), &mut cfg),
            ClicksimStatus::Ok
        );
        assert!(!cfg.is_null());

        let mut dim = 0u32;
        assert_eq!(clicksim_config_dim(cfg, &mut dim), ClicksimStatus::Ok);
        assert_eq!(dim, 2);

        let mut threshold = 0.0f64;
        assert_eq!(
            clicksim_config_threshold(cfg, &mut threshold),
            ClicksimStatus::Ok
        );
        assert!((threshold - 0.95).abs() < 1e-12);

        let mut born0 = 0.0f64;
        let mut born1 = 0.0f64;
        assert_eq!(clicksim_config_born(cfg, 0, &mut born0), ClicksimStatus::Ok);
        assert_eq!(clicksim_config_born(cfg, 1, &mut born1), ClicksimStatus::Ok);
        assert!((born0 - 10.0 / 19.0).abs() < 1e-12);
        assert!((born1 - 9.0 / 19.0).abs() < 1e-12);
        let mut oob = 0.0f64;
        assert_eq!(
            clicksim_config_born(cfg, 9, &mut oob),
            ClicksimStatus::OutOfRange
        );
        assert!(last_error().contains("out of range"));

        let mut log: *mut ClicksimLog = ptr::null_mut();
        assert_eq!(clicksim_run(cfg, &mut log), ClicksimStatus::Ok);
        assert!(!log.is_null());

        // Cross-check against the core library run with the same config.
        let expected = {
            let parsed = clicksim::parse_config_str(CONFIG_JSON).unwrap();
            clicksim::run_experiment(&parsed).unwrap()
        };

        let mut channels = 0u32;
        assert_eq!(clicksim_log_channels(log, &mut channels), ClicksimStatus::Ok);
        assert_eq!(channels, 2);

        let mut total = 0u64;
        assert_eq!(clicksim_log_total(log, &mut total), ClicksimStatus::Ok);
        assert_eq!(total, expected.total());
        assert!(total > 0);

        for channel in 0..2u32 {
            let mut count = 0u64;
            assert_eq!(
                clicksim_log_count(log, channel, &mut count),
                ClicksimStatus::Ok
            );
            assert_eq!(count, expected.counts()[channel as usize]);

            let mut freq = 0.0f64;
            assert_eq!(
                clicksim_log_frequency(log, channel, &mut freq),
                ClicksimStatus::Ok
            );
            assert_eq!(
                freq,
                count as f64 / total as f64,
            );

            let mut mean = 0.0f64;
            assert_eq!(
                clicksim_log_mean_interclick(log, channel, &mut mean),
                ClicksimStatus::Ok
            );
            assert!(mean > 0.0);
        }

        let mut n12_narrow = 0u64;
        let mut n12_wide = 0u64;
        assert_eq!(
            clicksim_log_coincidences(log, 0, &mut n12_narrow),
            ClicksimStatus::Ok
        );
        assert_eq!(
            clicksim_log_coincidences(log, 50, &mut n12_wide),
            ClicksimStatus::Ok
        );
        assert!(n12_wide >= n12_narrow);
        assert_eq!(
            n12_wide,
            clicksim::coincidence_count(&expected, 50).unwrap()
        );

        let mut g2 = -1.0f64;
        assert_eq!(clicksim_log_g2(log, 5, &mut g2), ClicksimStatus::Ok);
        assert!((0.0..1.0).contains(&g2));

        clicksim_log_free(log);
        clicksim_config_free(cfg);
    }
}

#[test]
fn run_from_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("config.json");
    let mut file = std::fs::File::create(&path).unwrap();
    file.write_all(CONFIG_JSON.as_bytes()).unwrap();
    drop(file);

    let c_path = CString::new(path.to_str().unwrap()).unwrap();
    let mut cfg: *mut ClicksimConfig = ptr::null_mut();
    unsafe {
        assert_eq!(
            clicksim_config_parse(c_path.as_ptr(), &mut cfg),
            ClicksimStatus::Ok
        );
        assert_eq!(clicksim_config_set_seed(cfg, 99), ClicksimStatus::Ok);
        assert_eq!(clicksim_config_set_workers(cfg, 2), ClicksimStatus::Ok);
        assert_eq!(clicksim_config_set_workers(cfg, 0), ClicksimStatus::Invalid);
        clicksim_config_free(cfg);
    }
}

#[test]
fn error_paths_report_status_and_message() {
    unsafe {
        // Null arguments.
        let mut cfg: *mut ClicksimConfig = ptr::null_mut();
        assert_eq!(
            clicksim_config_parse_json(ptr::null(), &mut cfg),
            ClicksimStatus::NullArgument
        );
        assert_eq!(
            clicksim_config_parse(ptr::null(), &mut cfg),
            ClicksimStatus::NullArgument
        );
        assert_eq!(clicksim_run(ptr::null(), ptr::null_mut()), ClicksimStatus::NullArgument);

        // Missing file.
        let path = CString::new("/nonexistent/config.json").unwrap();
        assert_eq!(
            clicksim_config_parse(path.as_ptr(), &mut cfg),
            ClicksimStatus::Io
        );
        assert!(cfg.is_null());

        // Broken JSON.
        let json = CString::new("{not json").unwrap();
        assert_eq!(
            clicksim_config_parse_json(json.as_ptr(), &mut cfg),
            ClicksimStatus::Parse
        );
        assert!(!last_error().is_empty());

        // Valid JSON, invalid covariance (not Hermitian).
        let json = CString::new(
            r#"{
                "dim": 2,
                "covariance": [
                    [{"re": 1.0, "im": 0.0}, {"re": 2.0, "im": 0.0}],
                    [{"re": 0.0, "im": 0.0}, {"re": 1.0, "im": 0.0}]
                ],
                "threshold": {"absolute": 1.0},
                "horizon_steps": 10,
                "tau_steps": [1],
                "seed": 0
            }"#,
        )
        .unwrap();
        assert_eq!(
            clicksim_config_parse_json(json.as_ptr(), &mut cfg),
            ClicksimStatus::Invalid
        );
        assert!(last_error().contains("Hermitian"));
    }
}

#[test]
fn version_is_a_c_string() {
    let version = unsafe { CStr::from_ptr(clicksim_version()) };
    assert_eq!(version.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
