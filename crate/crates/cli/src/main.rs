//! `greenchain`: evaluate, optimize and analyse the two-echelon green supply
//! chain model from a JSON run configuration.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use greenchain_core::optim::Algorithm;
use greenchain_core::surface::Axis;
use greenchain_core::PolicyKind;

use crate::config::{parse_assignment, parse_axis, RunConfig};

#[derive(Debug, Parser)]
#[command(
    name = "greenchain",
    version,
    about = "Green supply chain profit model and optimizers"
)]
pub struct Cli {
    /// Run configuration (JSON).
    #[arg(long, short, global = true, env = "GREENCHAIN_CONFIG")]
    config: Option<PathBuf>,
    /// Parameter document, overriding the config's `params`.
    #[arg(long, global = true)]
    params: Option<PathBuf>,
    /// Directory for output artifacts.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Carbon policy: tax, cap_trade or limited.
    #[arg(long, global = true)]
    policy: Option<PolicyKind>,
    /// More log output (repeat for debug).
    #[arg(long, short, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Clone, Default)]
pub struct SearchArgs {
    /// Optimizer: de1, de2 or pso.
    #[arg(long)]
    algo: Option<Algorithm>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    pop: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate the model at one decision vector.
    Evaluate {
        /// Override a decision variable, e.g. `--set W_r=290`.
        #[arg(long = "set", value_parser = parse_assignment)]
        set: Vec<(String, f64)>,
    },
    /// Maximize the policy objective.
    Optimize {
        #[command(flatten)]
        search: SearchArgs,
        /// Number of seeds (RNG streams) to run.
        #[arg(long)]
        seeds: Option<usize>,
    },
    /// One-at-a-time parameter sweeps.
    Sensitivity {
        #[command(flatten)]
        search: SearchArgs,
        /// Parameter to sweep; repeatable.
        #[arg(long = "param")]
        sweep_params: Vec<String>,
        /// Sweep every parameter with published reference changes.
        #[arg(long)]
        published: bool,
        /// Evaluate at the configured decisions instead of re-optimizing.
        #[arg(long)]
        fixed: bool,
    },
    /// Train the fuzzy surrogate on a one-variable profit sweep.
    Anfis {
        #[arg(long)]
        variable: Option<String>,
        #[arg(long)]
        lo: Option<f64>,
        #[arg(long)]
        hi: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        epochs: Option<usize>,
    },
    /// Objective grid over two decision variables.
    Surface {
        /// `NAME:LO:HI:N`
        #[arg(long, value_parser = parse_axis)]
        x: Option<Axis>,
        /// `NAME:LO:HI:N`
        #[arg(long, value_parser = parse_axis)]
        y: Option<Axis>,
    },
    /// Fit v1, v2 and C_Tax to a published optimum row.
    Calibrate {
        /// Fit the profits alone, without the stationarity terms.
        #[arg(long)]
        no_stationarity: bool,
    },
}

/// How a command failed, which fixes the exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad configuration, parameters or decisions: exit 2.
    Input(anyhow::Error),
    /// Anything else: exit 1.
    Internal(anyhow::Error),
    /// Calibration ran but did not meet its tolerance: exit 3.
    Calibration(String),
}

pub trait InputContext<T> {
    fn input(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> InputContext<T> for Result<T, E> {
    fn input(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Input(e.into()))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(e)) => {
            eprintln!("internal error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Calibration(msg)) => {
            eprintln!("calibration failed: {msg}");
            ExitCode::from(3)
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let cfg = match &cli.config {
        Some(path) => RunConfig::load(path).input()?,
        None => RunConfig::default(),
    };
    let ctx = commands::Context { cli, cfg: &cfg };
    match &cli.command {
        Command::Evaluate { set } => commands::evaluate(&ctx, set),
        Command::Optimize { search, seeds } => commands::optimize(&ctx, search, *seeds),
        Command::Sensitivity {
            search,
            sweep_params,
            published,
            fixed,
        } => commands::sensitivity(&ctx, search, sweep_params, *published, *fixed),
        Command::Anfis {
            variable,
            lo,
            hi,
            points,
            epochs,
        } => commands::anfis(&ctx, variable.as_deref(), *lo, *hi, *points, *epochs),
        Command::Surface { x, y } => commands::surface(&ctx, x.clone(), y.clone()),
        Command::Calibrate { no_stationarity } => commands::calibrate(&ctx, *no_stationarity),
    }
}
