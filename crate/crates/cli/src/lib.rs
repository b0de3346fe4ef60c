//! Command-line front end for `eventforge`.

pub mod commands;
pub mod config;
pub mod error;
pub mod events_csv;
pub mod io;
pub mod manifest;

use std::ffi::OsString;

use clap::{Parser, Subcommand};

use commands::{bench, calibrate, codec, eval, filter, info, simulate, windows};
pub use commands::simulate::simulate_config;
pub use config::SimulationConfig;
pub use error::{CliError, CliResult};
pub use manifest::RunManifest;

/// Caps the worker pool when set.
pub const THREADS_ENV: &str = "EVENTFORGE_THREADS";

#[derive(Debug, Parser)]
#[command(name = "eventforge", version, about = "Event-camera simulation, stream files and window images")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate an event camera watching a procedural scene.
    Simulate(simulate::SimulateArgs),
    /// Convert event CSV to the binary stream format.
    Encode(codec::EncodeArgs),
    /// Convert a binary event stream to CSV.
    Decode(codec::DecodeArgs),
    /// Summarize an event stream.
    Info(info::InfoArgs),
    /// Build window images from an event stream.
    Windows(windows::WindowsArgs),
    /// Kalman-filter a stream of pose predictions.
    Filter(filter::FilterArgs),
    /// Estimate camera parameters.
    #[command(subcommand)]
    Calibrate(calibrate::CalibrateCommand),
    /// Score keypoint predictions with PCK curves.
    Eval(eval::EvalArgs),
    /// Measure loader, simulator and LNES throughput.
    Bench(bench::BenchArgs),
}

fn configure_threads() -> CliResult<()> {
    let Some(value) = std::env::var_os(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = value
        .to_str()
        .and_then(|s| s.trim().parse().ok())
        .filter(|&n| n >= 1)
        .ok_or_else(|| CliError::usage(format!("{THREADS_ENV} must be a positive integer, got {value:?}")))?;
    // a pool already configured in this process is kept
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

pub fn execute(command: &Command) -> CliResult<()> {
    configure_threads()?;
    match command {
        Command::Simulate(a) => simulate::run(a),
        Command::Encode(a) => codec::encode(a),
        Command::Decode(a) => codec::decode(a),
        Command::Info(a) => info::run(a),
        Command::Windows(a) => windows::run(a),
        Command::Filter(a) => filter::run(a),
        Command::Calibrate(calibrate::CalibrateCommand::Threshold(a)) => calibrate::threshold(a),
        Command::Calibrate(calibrate::CalibrateCommand::Noise(a)) => calibrate::noise(a),
        Command::Eval(a) => eval::run(a),
        Command::Bench(a) => bench::run(a),
    }
}

/// Parses `argv` and runs the subcommand. Returns the process exit code:
/// 0 on success, 1 on a usage error, 2 on a data error.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn command_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn usage_errors_exit_with_one() {
        assert_eq!(run(["eventforge", "frobnicate"]), 1);
        assert_eq!(run(["eventforge", "windows", "x.bin", "--bogus"]), 1);
        assert_eq!(run(["eventforge", "--version"]), 0);
    }
}
