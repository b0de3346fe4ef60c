use std::path::PathBuf;

use clap::Args;
use eventforge::format::{decode_events, encode_events, steps_to_cover, DEFAULT_STEP_MICROS};
use eventforge::Micros;

use crate::error::{CliError, CliResult};
use crate::events_csv::{parse_events_csv, write_events_csv};
use crate::io::{manifest_beside, read_all, read_text, write_all};
use crate::manifest::RunManifest;

#[derive(Debug, Args)]
pub struct EncodeArgs {
    /// Event CSV (`t,x,y,p`); `-` for stdin.
    pub input: PathBuf,
    /// Binary event stream; `-` for stdout.
    #[arg(short = 'o', long, default_value = "-")]
    pub output: PathBuf,
    /// Step length in microseconds (default: the CSV directive, else 1000).
    #[arg(long)]
    pub step_us: Option<Micros>,
    /// Number of ticks to write (default: the CSV directive, else just enough
    /// to cover the last event).
    #[arg(long)]
    pub steps: Option<usize>,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    /// Binary event stream; `-` for stdin.
    pub input: PathBuf,
    /// Event CSV; `-` for stdout.
    #[arg(short = 'o', long, default_value = "-")]
    pub output: PathBuf,
    #[arg(long, default_value_t = DEFAULT_STEP_MICROS)]
    pub step_us: Micros,
}

pub fn encode(args: &EncodeArgs) -> CliResult<()> {
    let table = parse_events_csv(&read_text(&args.input)?)
        .map_err(|e| CliError::data(format!("{}: {e}", args.input.display())))?;
    let step_micros = args.step_us.or(table.step_micros).unwrap_or(DEFAULT_STEP_MICROS);
    let steps = args
        .steps
        .or(table.steps)
        .unwrap_or_else(|| steps_to_cover(&table.events, step_micros));
    let encoded = encode_events(&table.events, steps, step_micros)?;
    if encoded.quantized > 0 {
        eprintln!(
            "warning: {} event(s) were off the {step_micros}us step grid and were rounded down",
            encoded.quantized
        );
    }
    write_all(&args.output, &encoded.bytes)?;
    if let Some(path) = manifest_beside(&args.output) {
        RunManifest::new("encode")
            .input(&args.input)
            .output(&args.output)
            .param("step_us", step_micros)
            .param("steps", steps)
            .write(&path)?;
    }
    Ok(())
}

pub fn decode(args: &DecodeArgs) -> CliResult<()> {
    let bytes = read_all(&args.input)?;
    let decoded = decode_events(&bytes, args.step_us)
        .map_err(|e| CliError::data(format!("{}: {e}", args.input.display())))?;
    // events after the final tick get a step of their own
    let steps = decoded.steps.max(steps_to_cover(&decoded.events, args.step_us));
    write_all(&args.output, &write_events_csv(&decoded.events, steps, args.step_us))?;
    if let Some(path) = manifest_beside(&args.output) {
        RunManifest::new("decode")
            .input(&args.input)
            .output(&args.output)
            .param("step_us", args.step_us)
            .write(&path)?;
    }
    Ok(())
}
