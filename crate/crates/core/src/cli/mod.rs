//! The `heatwave` command-line front end.
//!
//! Every subcommand reads a TOML configuration file; `--set key=value`
//! overrides scalar keys. Exit codes: 0 pass, 1 configuration error,
//! 2 check failure, 3 pass at degraded tolerance.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;

use crate::error::{Error, Result};

pub mod config;
pub mod gronwall_verify;
pub mod kernels_verify;
pub mod simulate;
pub mod small_l;
pub mod sweep;

/// Result of a subcommand that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Degraded,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Self::Pass => 0,
            Self::Fail => 2,
            Self::Degraded => 3,
        }
    }

    fn from_pass(ok: bool) -> Self {
        if ok {
            Self::Pass
        } else {
            Self::Fail
        }
    }
}

/// Exit code for an error that stopped a subcommand.
pub fn error_exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_)
        | Error::Alignment(_)
        | Error::Domain(_)
        | Error::Shape(_)
        | Error::Capacity(_)
        | Error::Io { .. } => 1,
        _ => 2,
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "heatwave",
    version,
    about = "Localization error laboratory for the stochastic heat equation"
)]
struct Cli {
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true, env = "HEATWAVE_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct ConfigArgs {
    /// TOML configuration file.
    #[arg(long, short)]
    config: PathBuf,

    /// Override a scalar key, e.g. `--set sweep.n_reps=200`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check Green's function identities and bounds on random samples.
    KernelsVerify(ConfigArgs),
    /// Compare truncated resolvent series with the closed forms.
    GronwallVerify(ConfigArgs),
    /// Solve one realization and export snapshots.
    Simulate(ConfigArgs),
    /// Localization sweep over L with rate and envelope fits.
    Sweep(ConfigArgs),
    /// Second moment of the linear Neumann solution for small L.
    SmallLCheck(ConfigArgs),
}

fn load<T: DeserializeOwned>(args: &ConfigArgs) -> Result<T> {
    config::load(&args.config, &args.overrides)
}

fn dispatch(command: &Command) -> Result<Status> {
    match command {
        Command::KernelsVerify(a) => kernels_verify::run(&load(a)?),
        Command::GronwallVerify(a) => gronwall_verify::run(&load(a)?),
        Command::Simulate(a) => simulate::run(&load(a)?),
        Command::Sweep(a) => sweep::run(&load(a)?),
        Command::SmallLCheck(a) => small_l::run(&load(a)?),
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.threads {
        Some(0) => Err(Error::Config("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))
            .and_then(|pool| pool.install(|| dispatch(&cli.command))),
        None => dispatch(&cli.command),
    };
    match result {
        Ok(status) => status.exit_code(),
        Err(e) => {
            eprintln!("error: {e}");
            error_exit_code(&e)
        }
    }
}

pub fn run_from_env() -> i32 {
    run(std::env::args_os())
}

/// Creates the parent directory of an output file.
pub(crate) fn prepare_output(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => {
            std::fs::create_dir_all(dir).map_err(|source| Error::Io {
                path: dir.to_path_buf(),
                source,
            })
        }
        _ => Ok(()),
    }
}
