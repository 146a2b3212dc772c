//! `qlmps` command-line interface.
//!
//! Exit codes: 0 success, 1 computed failure (a condition fails, an
//! unsupported observable form, a resource cap), 2 input error.

mod commands;

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use qlmps::conditions::DEFAULT_CONDITION_TOL;
use qlmps::DEFAULT_STATEVECTOR_CAP;

use commands::{CliError, Outcome};

#[derive(Parser, Debug)]
#[command(
    name = "qlmps",
    version,
    about = "Matrix product states on quasi-local spin-chain algebras"
)]
struct Cli {
    /// Tolerance for condition residuals and cross-checks.
    #[arg(long, global = true, default_value_t = DEFAULT_CONDITION_TOL)]
    tol: f64,

    /// Maximum number of statevector amplitudes.
    #[arg(long, global = true, default_value_t = DEFAULT_STATEVECTOR_CAP)]
    cap: usize,

    /// Human-readable text instead of JSON.
    #[arg(long, global = true)]
    pretty: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the normalization and consistency conditions of a family.
    Validate { family: PathBuf },
    /// Evaluate the state on an observable.
    Expect {
        family: PathBuf,
        observable: PathBuf,
        /// Defaults to `both` for product observables and `naive` for dense ones.
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
        /// Include wall-clock timings (makes the output non-reproducible).
        #[arg(long)]
        timing: bool,
    },
    /// Reduced density matrix on the first N sites.
    Rho {
        family: PathBuf,
        #[arg(long)]
        n: usize,
    },
    /// Von Neumann entropy of the reduced density matrix on the first N sites.
    Entropy {
        family: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = BaseArg::Natural)]
        base: BaseArg,
    },
    /// Sample index tuples and compare both sides of the double-trace identity.
    IdentityCheck {
        family: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = commands::DEFAULT_SEED)]
        seed: u64,
    },
    /// Reproduce the worked example for a built-in model.
    Demo {
        #[arg(value_enum)]
        model: DemoModel,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Naive,
    Transfer,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BaseArg {
    Natural,
    Two,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DemoModel {
    Ghz,
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let opts = commands::Options {
        tol: cli.tol,
        cap: cli.cap,
    };
    match &cli.command {
        Command::Validate { family } => commands::validate(&opts, family),
        Command::Expect {
            family,
            observable,
            method,
            timing,
        } => commands::expect(&opts, family, observable, *method, *timing),
        Command::Rho { family, n } => commands::rho(&opts, family, *n),
        Command::Entropy { family, n, base } => commands::entropy(&opts, family, *n, *base),
        Command::IdentityCheck {
            family,
            n,
            k,
            samples,
            seed,
        } => commands::identity_check(&opts, family, *n, *k, *samples, *seed),
        Command::Demo { model } => match model {
            DemoModel::Ghz => commands::demo_ghz(&opts),
        },
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            let mut out = io::stdout().lock();
            // a closed pipe is not a computation failure
            let _ = if cli.pretty {
                write!(out, "{}", outcome.text)
            } else {
                writeln!(out, "{}", outcome.json)
            };
            if outcome.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(err.exit_code())
        }
    }
}
