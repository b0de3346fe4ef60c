use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Subcommand};
use eventforge::calibration::{
    estimate_noise_rates, estimate_threshold, parse_frame_manifest, CalibrationInput, IntensityFrame, NoiseRates,
    DEFAULT_EPSILON,
};
use eventforge::format::{decode_events, DecodedEvents, DEFAULT_STEP_MICROS};
use eventforge::{Micros, SensorGeometry};

use crate::error::{CliError, CliResult};
use crate::io::{manifest_beside, read_all, read_text, write_all};
use crate::manifest::RunManifest;

#[derive(Debug, Subcommand)]
pub enum CalibrateCommand {
    /// Contrast threshold from frames paired with an event stream.
    Threshold(ThresholdArgs),
    /// Noise rates from a recording of a static scene.
    Noise(NoiseArgs),
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    /// Binary event stream recorded alongside the frames.
    #[arg(long)]
    pub events: PathBuf,
    /// Frame list: `<microseconds> <image file>` per line, files relative to
    /// the list. Images are read as 8-bit grey levels.
    #[arg(long)]
    pub frames: PathBuf,
    #[arg(long, default_value_t = DEFAULT_STEP_MICROS)]
    pub step_us: Micros,
    /// Intensities below this are clamped before taking the log.
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    pub epsilon: f64,
    /// Positive noise rate (events/s) to correct for.
    #[arg(long, requires = "noise_negative")]
    pub noise_positive: Option<f64>,
    /// Negative noise rate (events/s) to correct for.
    #[arg(long, requires = "noise_positive")]
    pub noise_negative: Option<f64>,
    /// Report file (TOML); stdout when absent.
    #[arg(short = 'o', long, default_value = "-")]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct NoiseArgs {
    /// Binary event stream of a static scene.
    #[arg(long)]
    pub events: PathBuf,
    #[arg(long, default_value_t = DEFAULT_STEP_MICROS)]
    pub step_us: Micros,
    /// Recording length in seconds (default: ticks x step length).
    #[arg(long)]
    pub duration: Option<f64>,
    #[arg(short = 'o', long, default_value = "-")]
    pub output: PathBuf,
}

fn load_events(path: &Path, step_us: Micros) -> CliResult<DecodedEvents> {
    decode_events(&read_all(path)?, step_us).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

pub fn load_frames(list: &Path) -> CliResult<Vec<IntensityFrame>> {
    let entries = parse_frame_manifest(&read_text(list)?).map_err(|e| CliError::data(format!("{}: {e}", list.display())))?;
    let dir = list.parent().unwrap_or(Path::new("."));
    let mut frames: Vec<IntensityFrame> = Vec::with_capacity(entries.len());
    for entry in entries {
        let path = dir.join(&entry.file);
        let img = image::open(&path)
            .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?
            .to_luma8();
        let (w, h) = img.dimensions();
        let geometry = u16::try_from(w)
            .ok()
            .zip(u16::try_from(h).ok())
            .and_then(|(w, h)| SensorGeometry::new(w, h).ok())
            .ok_or_else(|| CliError::data(format!("{}: unsupported size {w}x{h}", path.display())))?;
        let frame = IntensityFrame::from_luma8(geometry, entry.timestamp, img.as_raw())
            .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
        frames.push(frame);
    }
    Ok(frames)
}

pub fn threshold(args: &ThresholdArgs) -> CliResult<()> {
    if !(args.epsilon > 0.0 && args.epsilon.is_finite()) {
        return Err(CliError::usage(format!("--epsilon must be > 0, got {}", args.epsilon)));
    }
    let noise = match (args.noise_positive, args.noise_negative) {
        (Some(positive), Some(negative)) => {
            if !(positive >= 0.0 && negative >= 0.0) {
                return Err(CliError::usage("noise rates must be >= 0"));
            }
            Some(NoiseRates { positive, negative })
        }
        _ => None,
    };
    let events = load_events(&args.events, args.step_us)?;
    let frames = load_frames(&args.frames)?;
    let input = CalibrationInput::new(&frames, &events.events).with_epsilon(args.epsilon);
    let estimate = estimate_threshold(&input, noise).map_err(|e| CliError::data(e.to_string()))?;

    let mut report = String::new();
    let _ = writeln!(report, "frames = {}", frames.len());
    let _ = writeln!(report, "events = {}", estimate.events);
    let _ = writeln!(report, "delta_total = {:?}", estimate.delta_total);
    let _ = writeln!(report, "threshold = {:?}", estimate.threshold);
    if let Some(n) = estimate.expected_noise {
        let _ = writeln!(report, "expected_noise = {n:?}");
    }
    if let Some(c) = estimate.noise_corrected {
        let _ = writeln!(report, "threshold_noise_corrected = {c:?}");
    }
    write_all(&args.output, report.as_bytes())?;
    if let Some(path) = manifest_beside(&args.output) {
        let mut m = RunManifest::new("calibrate threshold")
            .input(&args.events)
            .input(&args.frames)
            .output(&args.output)
            .param("step_us", args.step_us)
            .param("epsilon", args.epsilon);
        if let Some(n) = noise {
            m = m.param("noise_positive", n.positive).param("noise_negative", n.negative);
        }
        m.write(&path)?;
    }
    Ok(())
}

pub fn noise(args: &NoiseArgs) -> CliResult<()> {
    let events = load_events(&args.events, args.step_us)?;
    let duration = args
        .duration
        .unwrap_or(events.steps as f64 * args.step_us as f64 * 1e-6);
    let rates = estimate_noise_rates(&events.events, duration)?;
    let report = format!(
        "duration = {duration:?}\nevents = {}\nnoise_rate_positive = {:?}\nnoise_rate_negative = {:?}\n",
        events.events.len(),
        rates.positive,
        rates.negative
    );
    write_all(&args.output, report.as_bytes())?;
    if let Some(path) = manifest_beside(&args.output) {
        RunManifest::new("calibrate noise")
            .input(&args.events)
            .output(&args.output)
            .param("step_us", args.step_us)
            .param("duration", duration)
            .write(&path)?;
    }
    Ok(())
}
