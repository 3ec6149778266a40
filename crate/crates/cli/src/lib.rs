//! Command-line driver. [`run`] parses arguments, dispatches to a
//! subcommand and maps failures to exit codes: 2 for usage and
//! configuration errors, 3 for I/O and malformed input, 4 for numerical
//! failures. Errors are printed to stderr as one JSON line.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;

use std::ffi::OsString;

use clap::Parser;
use gdn_core::nn::checkpoint::FORMAT_VERSION;

use crate::args::{Cli, Command};
use crate::error::{CliError, CliResult};

pub fn version_line() -> String {
    format!("gdn {} (checkpoint format {FORMAT_VERSION})", env!("CARGO_PKG_VERSION"))
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        2 => log::LevelFilter::Debug,
        _ => log::LevelFilter::Trace,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .target(env_logger::Target::Stderr)
        .try_init();
}

fn init_threads(threads: Option<usize>) -> CliResult<()> {
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::usage("--threads must be at least 1"));
        }
        // Fails only if a pool already exists (repeated in-process runs).
        if rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() {
            log::debug!("global thread pool already initialised");
        }
    }
    Ok(())
}

fn dispatch(cli: Cli) -> CliResult<()> {
    init_logging(cli.verbose);
    init_threads(cli.threads)?;
    if cli.version {
        println!("{}", version_line());
        return Ok(());
    }
    match cli.command {
        Some(Command::Impute(a)) => commands::impute(&a),
        Some(Command::Sweep(a)) => commands::sweep(&a),
        Some(Command::Generate(a)) => commands::generate(&a),
        Some(Command::Noise(a)) => commands::noise(&a),
        Some(Command::Spectra(a)) => commands::spectra(&a),
        Some(Command::Gradcheck(a)) => commands::gradcheck(&a),
        Some(Command::OracleCheck(a)) => commands::oracle_check(&a),
        None => Err(CliError::usage(
            "a subcommand is required: impute, sweep, generate, noise, spectra, gradcheck, oracle-check",
        )),
    }
}

/// Runs the CLI on `argv` (program name first) and returns the exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let message = e.to_string();
            let first = message.lines().next().unwrap_or("invalid arguments");
            let first = first.strip_prefix("error: ").unwrap_or(first);
            eprintln!("{}", CliError::usage(first).to_json_line());
            return 2;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.to_json_line());
            e.kind.exit_code()
        }
    }
}
