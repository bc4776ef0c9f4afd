//! Command-line front end: validate configurations, run experiments, and
//! sweep coincidence windows, emitting JSON reports and plot-ready CSVs.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use clicksim::config::parse_config;
use clicksim::report::{cmd_g2, cmd_run, cmd_validate, CliError};

#[derive(Parser)]
#[command(
    name = "clicksim",
    about = "Threshold-detector click statistics for covariance-scaled complex Wiener processes",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the covariance and factor, print the predicted probabilities.
    Validate {
        /// Path to the JSON experiment configuration.
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the experiment; write report.json and frequencies.csv.
    Run {
        /// Path to the JSON experiment configuration.
        #[arg(long)]
        config: PathBuf,
        /// Output directory (created if missing).
        #[arg(long)]
        out: PathBuf,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Also write the full click log (clicks.csv); large runs produce
        /// millions of rows.
        #[arg(long)]
        emit_clicks: bool,
    },
    /// Run the experiment and write the g2(0; tau) window sweep (g2.csv).
    G2 {
        /// Path to the JSON experiment configuration.
        #[arg(long)]
        config: PathBuf,
        /// Output directory (created if missing).
        #[arg(long)]
        out: PathBuf,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Validate { config } => {
            let cfg = parse_config(&config)?;
            print!("{}", cmd_validate(&cfg)?);
            Ok(())
        }
        Command::Run {
            config,
            out,
            seed,
            emit_clicks,
        } => {
            let mut cfg = parse_config(&config)?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            let report = cmd_run(&cfg, &out, emit_clicks)?;
            println!(
                "total clicks: {} over {} steps ({:.2e} steps/s)",
                report.total_clicks, cfg.horizon_steps, report.steps_per_second
            );
            for ch in &report.channels {
                println!(
                    "channel {}: clicks {} frequency {:.6} born {:.6} abs_error {:.2e}",
                    ch.channel, ch.clicks, ch.frequency, ch.born, ch.abs_error
                );
            }
            println!("wrote {}", out.display());
            Ok(())
        }
        Command::G2 { config, out, seed } => {
            let mut cfg = parse_config(&config)?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            cmd_g2(&cfg, &out)?;
            println!("wrote {}", out.join("g2.csv").display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
