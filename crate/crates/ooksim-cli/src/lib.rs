//! Command-line front end: config parsing with dotted overrides, sweep and
//! PSD runs, and the self-test suite. The binary lives in `main.rs`; tests
//! drive the same entry points through this library.

pub mod commands;
pub mod config;

use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

pub use commands::{cmd_psd, cmd_selftest, cmd_sweep, PhaseSelection};
pub use config::{parse_config, RunManifest};

/// Errors split by exit code: config problems exit 2, runtime failures 3.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Runtime(m) => m,
        }
    }
}

/// Link-level simulator for Manchester-coded OOK with a noncoherent
/// envelope-detecting receiver.
#[derive(Parser, Debug)]
#[command(name = "ooksim", version, about)]
pub struct Cli {
    /// TOML config file; defaults apply when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Override one config key, e.g. --set llr=hard or --set stop.max_trials=500.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub sets: Vec<String>,

    /// Override the RNG seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads for trial simulation (0 = machine parallelism).
    #[arg(long, global = true, default_value_t = 0)]
    pub workers: usize,

    /// Output directory.
    #[arg(long, global = true, default_value = "results")]
    pub out: PathBuf,

    /// Overwrite existing output files.
    #[arg(long, global = true)]
    pub force: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run Monte-Carlo BER/BLER sweeps; one CSV + JSON sidecar per curve.
    Sweep {
        /// Comma-separated LLR methods to run as labeled curves,
        /// e.g. --compare exact,hard.
        #[arg(long)]
        compare: Option<String>,
    },
    /// Estimate transmit-waveform PSDs and spectral flatness.
    Psd {
        /// Which phase modes to evaluate.
        #[arg(long, value_enum, default_value_t = PhaseArg::Both)]
        phase: PhaseArg,
    },
    /// Run the fast property-check suite (< 60 s).
    Selftest,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum PhaseArg {
    Both,
    None,
    Random,
}

impl From<PhaseArg> for PhaseSelection {
    fn from(p: PhaseArg) -> Self {
        match p {
            PhaseArg::Both => PhaseSelection::Both,
            PhaseArg::None => PhaseSelection::NoneOnly,
            PhaseArg::Random => PhaseSelection::RandomOnly,
        }
    }
}

/// Parses arguments and dispatches; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles --help/--version; real usage errors exit 2.
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
    }
}

fn dispatch(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Sweep { compare } => {
            let manifest = parse_config(
                cli.config.as_deref(),
                &cli.sets,
                cli.seed,
                compare.as_deref(),
                &cli.out,
                cli.workers,
                cli.force,
            )?;
            cmd_sweep(&manifest)
        }
        Command::Psd { phase } => {
            let manifest = parse_config(
                cli.config.as_deref(),
                &cli.sets,
                cli.seed,
                None,
                &cli.out,
                cli.workers,
                cli.force,
            )?;
            cmd_psd(&manifest, (*phase).into()).map(|_| ())
        }
        Command::Selftest => cmd_selftest(),
    }
}
