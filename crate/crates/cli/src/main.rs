mod commands;
mod format;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tenergy_core::TimingMethod;

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Exit {
    Success = 0,
    Usage = 1,
    IoOrParse = 2,
    Degenerate = 3,
    Unconverged = 4,
}

impl From<Exit> for ExitCode {
    fn from(e: Exit) -> Self {
        ExitCode::from(e as u8)
    }
}

#[derive(Debug, Parser)]
#[command(name = "tenergy", version, about = "Measure, model and predict process energy from timing")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,

    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Args, Clone, Default)]
pub struct GlobalOpts {
    /// Seed for every simulated quantity
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Confidence level of the stopping rule [default: 0.99]
    #[arg(long, global = true)]
    pub alpha: Option<f64>,

    /// Halfwidth bound relative to the running mean [default: 0.01]
    #[arg(long = "rel-bound", global = true)]
    pub rel_bound: Option<f64>,

    /// Cap on repetitions per stream [default: 100]
    #[arg(long = "max-repeats", global = true)]
    pub max_repeats: Option<usize>,

    /// Timing quantity used for the model: wall, cpu-user or cpu-total
    #[arg(long, global = true, value_parser = parse_timing)]
    pub timing: Option<TimingMethod>,
}

fn parse_timing(s: &str) -> Result<TimingMethod, String> {
    s.parse().map_err(|e: tenergy_core::Error| e.to_string())
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Run a measurement campaign and write its dataset
    Measure {
        manifest: PathBuf,
        dataset: PathBuf,
        /// Forward the measured process's stdout and stderr
        #[arg(long)]
        keep_output: bool,
    },
    /// Fit the linear time-to-energy model to a dataset
    Fit { dataset: PathBuf, model: PathBuf },
    /// Predict energy in joules for a processing time in seconds
    Predict {
        model: PathBuf,
        #[arg(allow_negative_numbers = true)]
        time: f64,
    },
    /// Write plot-ready residuals and a text summary
    Report {
        dataset: PathBuf,
        model: PathBuf,
        out: PathBuf,
        /// Also write the summary to this file
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Generate synthetic traces or datasets
    #[command(subcommand)]
    Simulate(SimulateCmd),
}

#[derive(Debug, Subcommand)]
pub enum SimulateCmd {
    /// Power trace of a single decode between idle phases
    Trace {
        out: PathBuf,
        #[arg(long, default_value_t = 2.6)]
        idle_power: f64,
        #[arg(long, default_value_t = 3.4)]
        active_power: f64,
        #[arg(long, default_value_t = 0.5)]
        start: f64,
        #[arg(long, default_value_t = 1.5)]
        end: f64,
        #[arg(long, default_value_t = 2.0)]
        duration: f64,
        /// Seconds between samples
        #[arg(long, default_value_t = 0.001)]
        interval: f64,
        /// Gaussian noise per sample, in watts
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        /// Length of the initial idle-to-active ramp, in seconds
        #[arg(long, default_value_t = 0.0)]
        ramp: f64,
    },
    /// Time/energy pairs on a line with multiplicative noise
    #[command(allow_negative_numbers = true)]
    Dataset {
        out: PathBuf,
        #[arg(long, default_value_t = 0.5377)]
        power: f64,
        #[arg(long, default_value_t = 0.0480)]
        offset: f64,
        #[arg(long, default_value_t = 120)]
        count: usize,
        #[arg(long, default_value_t = 1.0)]
        t_min: f64,
        #[arg(long, default_value_t = 100.0)]
        t_max: f64,
        #[arg(long, default_value_t = 0.0)]
        noise_rel: f64,
        /// Bend short streams toward the origin with this time constant (s)
        #[arg(long)]
        short_tau: Option<f64>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { Exit::Usage } else { Exit::Success };
            let _ = e.print();
            return code.into();
        }
    };
    commands::run(cli).into()
}
