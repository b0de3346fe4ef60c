use std::path::PathBuf;

use clap::{Args, ValueEnum};
use eventforge::format::{decode_events, DEFAULT_STEP_MICROS};
use eventforge::representations::{build, encode_image, LnesAccumulator};
use eventforge::window::{slide_windows, EventWindow, WindowSpan};
use eventforge::{Event, Micros, RepresentationKind, SensorGeometry};
use rayon::prelude::*;

use crate::error::{CliError, CliResult};
use crate::io::{manifest_beside, read_all, write_all};
use crate::manifest::RunManifest;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Span {
    /// Windows lying entirely inside the recording.
    Full,
    /// Windows until every event is covered.
    Cover,
}

#[derive(Debug, Args)]
pub struct WindowsArgs {
    /// Binary event stream; `-` for stdin.
    pub input: PathBuf,
    /// Representation to build.
    #[arg(long, default_value = "lnes")]
    pub repr: RepresentationKind,
    #[arg(long, default_value_t = 100.0)]
    pub length_ms: f64,
    #[arg(long, default_value_t = 1.0)]
    pub stride_ms: f64,
    #[arg(long, default_value_t = DEFAULT_STEP_MICROS)]
    pub step_us: Micros,
    #[arg(long, default_value_t = 240)]
    pub width: u16,
    #[arg(long, default_value_t = 180)]
    pub height: u16,
    #[arg(long, value_enum, default_value_t = Span::Full)]
    pub span: Span,
    /// Concatenated image records; `-` for stdout.
    #[arg(short = 'o', long, default_value = "-")]
    pub output: PathBuf,
}

/// Milliseconds to whole microseconds.
pub fn ms_to_micros(name: &str, ms: f64) -> CliResult<Micros> {
    let us = ms * 1000.0;
    if !(us >= 1.0 && us.is_finite()) || (us - us.round()).abs() > 1e-6 {
        return Err(CliError::usage(format!("--{name} {ms} is not a positive whole number of microseconds")));
    }
    Ok(us.round() as Micros)
}

/// Renders every window of `events` and serializes the images in order.
pub fn render_windows(
    events: &[Event],
    recording_end: Micros,
    kind: RepresentationKind,
    length: Micros,
    stride: Micros,
    span: Span,
    geometry: SensorGeometry,
) -> eventforge::Result<(usize, Vec<u8>)> {
    let span = match span {
        Span::Full => WindowSpan::FullWithin(recording_end),
        Span::Cover => WindowSpan::CoverEvents,
    };
    let starts: Vec<Micros> = slide_windows(events, length, stride)?.with_span(span).map(|w| w.start).collect();
    let chunk = (starts.len() / (4 * rayon::current_num_threads())).max(64);
    let parts: Vec<Vec<u8>> = starts
        .par_chunks(chunk)
        .map(|starts| -> eventforge::Result<Vec<u8>> {
            let mut out = Vec::new();
            let mut acc = LnesAccumulator::new(geometry);
            for &start in starts {
                let window = EventWindow::from_sorted(events, start, length);
                let image = match kind {
                    RepresentationKind::Lnes => acc.render(&window)?,
                    _ => build(kind, &window, geometry)?,
                };
                encode_image(&image, &mut out);
            }
            Ok(out)
        })
        .collect::<eventforge::Result<_>>()?;
    Ok((starts.len(), parts.concat()))
}

pub fn run(args: &WindowsArgs) -> CliResult<()> {
    let length = ms_to_micros("length-ms", args.length_ms)?;
    let stride = ms_to_micros("stride-ms", args.stride_ms)?;
    let geometry = SensorGeometry::new(args.width, args.height)?;
    let bytes = read_all(&args.input)?;
    let decoded = decode_events(&bytes, args.step_us).map_err(|e| CliError::data(format!("{}: {e}", args.input.display())))?;
    let recording_end = decoded.steps as Micros * args.step_us;
    let (count, out) = render_windows(&decoded.events, recording_end, args.repr, length, stride, args.span, geometry)?;
    write_all(&args.output, &out)?;
    eprintln!("{count} {} window(s) of {length}us every {stride}us", args.repr.name());
    if let Some(path) = manifest_beside(&args.output) {
        RunManifest::new("windows")
            .input(&args.input)
            .output(&args.output)
            .param("repr", args.repr.name())
            .param("length_us", length)
            .param("stride_us", stride)
            .param("step_us", args.step_us)
            .param("width", args.width)
            .param("height", args.height)
            .param("span", format!("{:?}", args.span).to_lowercase())
            .param("windows", count)
            .write(&path)?;
    }
    Ok(())
}
