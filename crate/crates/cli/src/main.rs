//! `notgate` — synthesize, optimize and verify robust NOT-gate pulses.
//!
//! Exit codes: 0 success, 1 usage, 2 validation (bad flags resolved by clap
//! are 1; bad files/configuration are 2), 3 numeric failure.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

pub const DEFAULT_SEED: u64 = 12345;

#[derive(Parser)]
#[command(name = "notgate", version, about = "Robust NOT-gate pulse toolkit")]
struct Cli {
    /// Quadrature grid / propagation steps (optimize reads it from the
    /// config file unless this flag is given).
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Master random seed (optimize reads it from the config file unless
    /// this flag is given).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the objectives of a coefficient file and export its profile.
    Evaluate {
        /// Coefficient JSON file.
        coeffs: PathBuf,
        /// Accept coefficient sets that fail validation (e.g. sum != 1).
        #[arg(long)]
        raw: bool,
        /// Rows in the exported profile CSV.
        #[arg(long, default_value_t = 512)]
        samples: usize,
    },
    /// Run the multi-objective pulse search described by a config file.
    Optimize {
        /// Run configuration JSON file.
        config: PathBuf,
    },
    /// Sweep fidelity against perturbation amplitude.
    Robustness {
        /// Coefficient JSON file.
        coeffs: PathBuf,
        /// Smallest normalized amplitude.
        #[arg(long, default_value_t = 0.0)]
        eps_min: f64,
        /// Largest normalized amplitude.
        #[arg(long, default_value_t = 0.5)]
        eps_max: f64,
        /// Number of amplitudes.
        #[arg(long, default_value_t = 26)]
        points: usize,
        /// Random-perturbation fidelity samples per amplitude.
        #[arg(long, default_value_t = 0)]
        random_samples: usize,
        /// Piecewise-constant segments of the random perturbation.
        #[arg(long, default_value_t = 20)]
        segments: usize,
    },
    /// Verify the series identities on the square and stored robust pulses.
    Verify {
        /// Perturbation scale, in [0, 0.3].
        #[arg(long, default_value_t = 0.05)]
        eps: f64,
    },
    /// Merge Pareto fronts or extract a knee point.
    Front {
        #[command(subcommand)]
        tool: FrontTool,
    },
}

#[derive(Subcommand)]
enum FrontTool {
    /// Pool front CSVs and keep the mutually non-dominated subset.
    Merge {
        /// Input front CSVs.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Merged front CSV to write.
        #[arg(long)]
        output: PathBuf,
    },
    /// Report the minimum-second-objective point below a first-objective
    /// threshold.
    Knee {
        /// Front CSV.
        input: PathBuf,
        #[arg(long, default_value_t = 0.0005)]
        threshold: f64,
    },
}

/// Errors mapped to process exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Exit code 2: bad input files, configuration or parameter ranges.
    Validation(String),
    /// Exit code 3: numeric failure while computing on valid input.
    Numeric(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Numeric(m) => m,
        }
    }
}

impl From<notgate::Error> for CliError {
    fn from(e: notgate::Error) -> Self {
        if e.is_validation() {
            CliError::Validation(e.to_string())
        } else {
            CliError::Numeric(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Validation(format!("i/o error: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Validation(format!("JSON error: {e}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
    match cli.command {
        Command::Evaluate { coeffs, raw, samples } => {
            let grid = cli.grid.unwrap_or(notgate::pulse::DEFAULT_GRID);
            commands::evaluate(&coeffs, raw, samples, grid, &out)
        }
        Command::Optimize { config } => {
            commands::optimize(&config, cli.grid, cli.seed, cli.out.as_deref())
        }
        Command::Robustness { coeffs, eps_min, eps_max, points, random_samples, segments } => {
            let sweep = notgate::objectives::RobustnessSweep {
                eps_min,
                eps_max,
                points,
                random_samples,
                segments,
                seed: cli.seed.unwrap_or(DEFAULT_SEED),
                steps: cli.grid.unwrap_or(notgate::pulse::DEFAULT_GRID),
            };
            commands::robustness(&coeffs, &sweep, &out)
        }
        Command::Verify { eps } => {
            let grid = cli.grid.unwrap_or(notgate::pulse::DEFAULT_GRID);
            commands::verify(eps, grid)
        }
        Command::Front { tool } => match tool {
            FrontTool::Merge { inputs, output } => commands::front_merge(&inputs, &output),
            FrontTool::Knee { input, threshold } => commands::front_knee(&input, threshold),
        },
    }
}
