use std::path::{Path, PathBuf};

use clap::Args;
use eventforge::format::{encode_events, encode_poses};
use eventforge::simulator::{simulate_with, SimulationOutput};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::SimulationConfig;
use crate::error::{CliError, CliResult};
use crate::io::{read_text, write_all};
use crate::manifest::RunManifest;

pub const DEFAULT_DURATION: f64 = 1.0;

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// TOML configuration; built-in defaults when absent.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Simulated seconds (overrides the config file; default 1).
    #[arg(long)]
    pub duration: Option<f64>,
    /// RNG seed (overrides the config file; default 0).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Directory receiving events.bin, metadata.bin and manifest.toml.
    #[arg(short = 'o', long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Event stream destination instead of <out-dir>/events.bin; `-` for stdout.
    #[arg(long)]
    pub events: Option<PathBuf>,
    /// Metadata destination instead of <out-dir>/metadata.bin.
    #[arg(long)]
    pub metadata: Option<PathBuf>,
}

/// Runs the simulator exactly as `simulate` does.
pub fn simulate_config(config: &SimulationConfig, duration: f64, seed: u64) -> eventforge::Result<SimulationOutput> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let first_segment = duration.min(config.scene.rerandomize_period).ceil().max(1.0) as usize;
    let scene = config.scene.sample_scene(config.camera.geometry, first_segment, &mut rng);
    simulate_with(scene, config.camera.clone(), config.scene.clone(), duration, rng)
}

pub fn load_config(path: Option<&Path>) -> CliResult<SimulationConfig> {
    let config = match path {
        Some(p) => SimulationConfig::parse(&read_text(p)?).map_err(|e| CliError::usage(format!("{}: {e}", p.display())))?,
        None => SimulationConfig::default(),
    };
    Ok(config)
}

pub fn run(args: &SimulateArgs) -> CliResult<()> {
    let mut config = load_config(args.config.as_deref())?;
    let duration = args.duration.or(config.duration).unwrap_or(DEFAULT_DURATION);
    let seed = args.seed.or(config.seed).unwrap_or(0);
    config.duration = Some(duration);
    config.seed = Some(seed);
    config.validate()?;

    let output = simulate_config(&config, duration, seed)?;
    let steps = output.steps();
    let encoded = encode_events(&output.events, steps, output.step_micros)?;
    let events_path = args.events.clone().unwrap_or_else(|| args.out_dir.join("events.bin"));
    let metadata_path = args.metadata.clone().unwrap_or_else(|| args.out_dir.join("metadata.bin"));
    write_all(&events_path, &encoded.bytes)?;
    write_all(&metadata_path, &encode_poses(&output.poses))?;

    let positive = output
        .events
        .iter()
        .filter(|e| e.polarity == eventforge::Polarity::Positive)
        .count();
    eprintln!(
        "simulated {steps} steps ({duration} s): {} events ({positive} positive), {} segment(s)",
        output.events.len(),
        output.segments.len()
    );

    let mut manifest = RunManifest::new("simulate")
        .output(&events_path)
        .output(&metadata_path)
        .param("duration", duration)
        .param("step_us", output.step_micros)
        .param("width", config.camera.geometry.width)
        .param("height", config.camera.geometry.height);
    manifest.seed = Some(seed);
    manifest.settings = Some(toml::Table::try_from(&config).map_err(CliError::usage)?);
    if let Some(p) = &args.config {
        manifest.config = Some(p.display().to_string());
        manifest = manifest.input(p);
    }
    manifest.write(&args.out_dir.join("manifest.toml"))
}
