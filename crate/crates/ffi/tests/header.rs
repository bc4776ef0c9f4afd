//! The generated header must stand alone as C.

use std::process::Command;

#[test]
fn generated_header_compiles_as_c99() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/clicksim.h");
    let text = std::fs::read_to_string(header).expect("header generated by build.rs");
    for symbol in [
        "clicksim_config_parse",
        "clicksim_run",
        "clicksim_log_g2",
        "typedef struct ClicksimConfig ClicksimConfig;",
        "typedef struct ClicksimLog ClicksimLog;",
    ] {
        assert!(text.contains(symbol), "header is missing {symbol}");
    }

    match Command::new("cc")
        .args(["-std=c99", "-Wall", "-fsyntax-only", "-x", "c", header])
        .status()
    {
        Ok(status) => assert!(status.success(), "cc rejected the header"),
        Err(_) => eprintln!("cc unavailable, syntax check skipped"),
    }
}
