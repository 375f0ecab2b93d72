//! Command-line front end: `simulate`, `verify`, `noise-stats`, `spectra`,
//! `galerkin` and `report`.
//!
//! Exit codes: 0 success, 1 usage/config/I-O error or unknown suite,
//! 2 `EXPLOSION_SUSPECTED`, 3 `NUMERIC_NAN`, 4 corrupt or missing run
//! directory in `report`, 5 a verification check failed.

pub mod artifacts;
pub mod config;
pub mod report;
pub mod stats;
pub mod verify;

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::error::SnsError;
use crate::galerkin::run_levels;
use crate::solver::RunStatus;

pub use artifacts::{simulate, verify_manifest, RunManifest, SimulateOutcome};
pub use config::{load_config, parse_config};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_EXPLOSION: i32 = 2;
pub const EXIT_NAN: i32 = 3;
pub const EXIT_CORRUPT: i32 = 4;
pub const EXIT_CHECK_FAILED: i32 = 5;

#[derive(Parser, Debug)]
#[command(name = "sns", version, about = "Stochastic Navier-Stokes pseudo-spectral lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the solver from a key=value config and write all artifacts.
    Simulate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run an invariant suite and print JSON lines.
    Verify {
        suite: String,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Read energy_report.csv from this run directory (energy suite).
        #[arg(long)]
        run_dir: Option<PathBuf>,
        /// Also write the JSON lines to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte-Carlo statistics of the enhanced product against r_lambda.
    NoiseStats {
        #[arg(long, default_value_t = 64)]
        n: usize,
        #[arg(long, value_delimiter = ',', default_value = "8,27")]
        lambdas: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        times: Vec<f64>,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Top eigenvalue of the renormalized operator per level and seed.
    Spectra {
        #[arg(long, default_value_t = 64)]
        n: usize,
        #[arg(long, value_delimiter = ',', default_value = "8,27")]
        lambdas: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "7")]
        seeds: Vec<u64>,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Coupled Galerkin levels; writes levels.csv into <out_dir>/galerkin.
    Galerkin {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "8,16,32,64")]
        levels: Vec<f64>,
        /// Track the noise magnitudes of every level (slower).
        #[arg(long)]
        magnitudes: bool,
    },
    /// Summarize a run directory after checking its digests.
    Report { dir: PathBuf },
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), SnsError> {
    match out {
        Some(p) => {
            if let Some(parent) = p.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(p, text)?;
        }
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

/// Caps the rayon pool from `SNS_THREADS`; ignored when unset or invalid.
pub fn configure_threads() {
    if let Some(n) = std::env::var("SNS_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn fail(msg: impl std::fmt::Display) -> i32 {
    eprintln!("error: {msg}");
    EXIT_ERROR
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match cli.command {
        Command::Simulate { config } => {
            let cfg = match load_config(&config) {
                Ok(c) => c,
                Err(SnsError::Config { line, msg }) => return fail(format!("{}:{line}: {msg}", config.display())),
                Err(e) => return fail(e),
            };
            match simulate(&cfg) {
                Ok(o) => {
                    println!("{} -> {}", o.calibration.status, o.dir.display());
                    match o.output.status {
                        RunStatus::Completed => EXIT_OK,
                        RunStatus::Explosion { t, norm } => {
                            eprintln!("EXPLOSION_SUSPECTED at t={t}: |w|={norm:e}");
                            EXIT_EXPLOSION
                        }
                        RunStatus::NumericNan { t } => {
                            eprintln!("NUMERIC_NAN at t={t}");
                            EXIT_NAN
                        }
                    }
                }
                Err(e) => fail(e),
            }
        }
        Command::Verify {
            suite,
            samples,
            seed,
            run_dir,
            out,
        } => {
            let opt = verify::VerifyOptions { samples, seed, run_dir };
            let checks = match verify::run_suite(&suite, &opt) {
                Ok(c) => c,
                Err(e) => return fail(e),
            };
            let text: String = checks.iter().map(|c| c.to_json() + "\n").collect();
            print!("{text}");
            if out.is_some() {
                if let Err(e) = emit(&out, &text) {
                    return fail(e);
                }
            }
            if checks.iter().any(|c| c.status == verify::CheckStatus::Underpowered) {
                eprintln!("warning: samples={samples} < {}; statistical checks UNDERPOWERED", verify::MIN_SAMPLES);
            }
            if checks.iter().any(|c| c.status == verify::CheckStatus::Fail) {
                EXIT_CHECK_FAILED
            } else {
                EXIT_OK
            }
        }
        Command::NoiseStats {
            n,
            lambdas,
            times,
            samples,
            seed,
            out,
        } => match stats::noise_stats(n, &lambdas, &times, samples, seed) {
            Ok(rows) => match emit(&out, &stats::noise_stats_csv(&rows)) {
                Ok(()) => EXIT_OK,
                Err(e) => fail(e),
            },
            Err(e) => fail(e),
        },
        Command::Spectra {
            n,
            lambdas,
            seeds,
            t,
            out,
        } => match stats::spectra(n, &lambdas, &seeds, t) {
            Ok(rows) => match emit(&out, &stats::spectra_csv(&rows)) {
                Ok(()) => EXIT_OK,
                Err(e) => fail(e),
            },
            Err(e) => fail(e),
        },
        Command::Galerkin {
            config,
            levels,
            magnitudes,
        } => {
            let cfg = match load_config(&config) {
                Ok(c) => c,
                Err(SnsError::Config { line, msg }) => return fail(format!("{}:{line}: {msg}", config.display())),
                Err(e) => return fail(e),
            };
            let start = artifacts::galerkin_start();
            let rep = match run_levels(&cfg, &levels, magnitudes) {
                Ok(r) => r,
                Err(e) => return fail(e),
            };
            let dir = cfg.out_dir.join("galerkin");
            if let Err(e) = artifacts::write_galerkin(&dir, &cfg, &rep, start) {
                return fail(e);
            }
            print!("{}", rep.to_csv());
            println!(
                "uniform bound {:e}; distances decreasing: {}",
                rep.uniform_bound(),
                rep.distances_decrease()
            );
            EXIT_OK
        }
        Command::Report { dir } => match report::report(&dir) {
            Ok(text) => {
                print!("{text}");
                EXIT_OK
            }
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_CORRUPT
            }
        },
    }
}
