//! Command-line interface: `run`, `bench` and `oracle`.

pub mod bench;
pub mod config;
pub mod experiment;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::analysis::write_oracle_csv;
use crate::error::Result;

pub use bench::{bench_timing, TimingReport};
pub use config::{ExperimentConfig, ResolvedConfig};
pub use experiment::{run_experiment, BenchReport};

#[derive(Debug, Parser)]
#[command(name = "esabc", version, about = "Importance-sampling ABC with summary-free discrepancies")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a replicated experiment and write the report and per-cell artifacts.
    Run {
        config: PathBuf,
        /// Divide N and multiply the keep fraction by this factor.
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        /// Output directory (overrides the config).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time simulation plus discrepancy evaluation over sample sizes.
    Bench {
        config: PathBuf,
        /// Ascending sample sizes, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        n_list: Vec<usize>,
        /// Records per measurement (overrides the config).
        #[arg(long)]
        records: Option<usize>,
        #[arg(long, default_value_t = 1)]
        repeats: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closed-form large-sample curves for the Gaussian location model.
    Oracle {
        #[arg(long, allow_negative_numbers = true)]
        theta0: f64,
        #[arg(long, default_value_t = 1.0)]
        tau: f64,
        /// Thresholds, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        eps: Vec<f64>,
        /// Output CSV file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn execute(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run { config, scale, out } => {
            let cfg = ExperimentConfig::load(&config)?.scaled(scale)?.resolve()?;
            let out = out.unwrap_or_else(|| cfg.output_dir.clone());
            let (report, _) = run_experiment(&cfg, Some(&out))?;
            report.write_csv(std::io::stdout().lock())?;
            for (r, label, msg) in &report.failures {
                eprintln!("replication {r}, {label}: {msg}");
            }
            Ok(report.all_ok())
        }
        Command::Bench { config, n_list, records, repeats, out } => {
            let cfg = ExperimentConfig::load(&config)?.resolve()?;
            let report = bench_timing(&cfg, &n_list, records.unwrap_or(cfg.bench_records), repeats)?;
            let out = out.unwrap_or_else(|| cfg.output_dir.clone());
            fs::create_dir_all(&out)?;
            report.write_csv(fs::File::create(out.join("timing.csv"))?)?;
            report.write_slopes_csv(&cfg.discrepancies, fs::File::create(out.join("slopes.csv"))?)?;
            report.write_slopes_csv(&cfg.discrepancies, std::io::stdout().lock())?;
            Ok(true)
        }
        Command::Oracle { theta0, tau, eps, out } => {
            match out {
                Some(path) => write_oracle_csv(theta0, tau, &eps, fs::File::create(path)?)?,
                None => {
                    let mut lock = std::io::stdout().lock();
                    write_oracle_csv(theta0, tau, &eps, &mut lock)?;
                    lock.flush()?;
                }
            }
            Ok(true)
        }
    }
}

/// Parses arguments and runs; exit code 0 only when every cell succeeded.
pub fn main_entry() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
