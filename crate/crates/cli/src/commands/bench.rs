use std::fmt::Write as _;
use std::hint::black_box;
use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use eventforge::format::{encode_events, encode_poses, load_paired};
use eventforge::representations::LnesAccumulator;
use eventforge::simulator::{CameraConfig, SceneSampler, Simulator};
use eventforge::window::{slide_windows, WindowSpan};
use eventforge::{Event, Micros, Polarity, PoseVector, RepresentationKind, SensorGeometry, WindowImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{CliError, CliResult, Context};
use crate::io::write_all;

/// Loader throughput reported for the original dataset tooling.
pub const REFERENCE_LOADER_RATE: f64 = 1.75e8;

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Synthetic events for the loader benchmark.
    #[arg(long, default_value_t = 20_000_000)]
    pub events: usize,
    /// Simulated frames at 240x180 (also the stream the LNES benchmark windows).
    #[arg(long, default_value_t = 2000)]
    pub frames: usize,
    /// Timed repetitions of the loader benchmark; the best is reported.
    #[arg(long, default_value_t = 3)]
    pub repeat: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also write the report here.
    #[arg(short = 'o', long)]
    pub output: Option<PathBuf>,
}

const EVENTS_PER_STEP: usize = 5000;

fn loader_rate(args: &BenchArgs) -> CliResult<(f64, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let steps = args.events.div_ceil(EVENTS_PER_STEP).max(1);
    let n = steps * EVENTS_PER_STEP;
    let events: Vec<Event> = (0..n)
        .map(|i| {
            let p = if rng.random_bool(0.5) { Polarity::Positive } else { Polarity::Negative };
            Event::new(rng.random_range(0..240), rng.random_range(0..180), (i / EVENTS_PER_STEP) as Micros * 1000, p)
        })
        .collect();
    let bytes = encode_events(&events, steps, 1000)?.bytes;
    drop(events);
    let dir = tempfile::tempdir().map_err(CliError::data)?;
    let ev_path = dir.path().join("events.bin");
    let meta_path = dir.path().join("metadata.bin");
    std::fs::write(&ev_path, &bytes).at(&ev_path)?;
    std::fs::write(&meta_path, encode_poses(&vec![PoseVector::default(); steps])).at(&meta_path)?;
    drop(bytes);
    // warm the page cache
    black_box(std::fs::read(&ev_path).at(&ev_path)?);

    let mut best = 0.0f64;
    for _ in 0..args.repeat.max(1) {
        let t0 = Instant::now();
        let dataset = load_paired(&ev_path, &meta_path)?;
        let mut checksum = 0u64;
        for step in dataset.iter() {
            for e in step.events() {
                checksum = checksum.wrapping_add(e.x as u64 + e.y as u64 + e.polarity.channel() as u64);
            }
        }
        black_box(checksum);
        best = best.max(n as f64 / t0.elapsed().as_secs_f64());
    }
    Ok((best, n))
}

pub fn run(args: &BenchArgs) -> CliResult<()> {
    if args.frames < 101 {
        return Err(CliError::usage("--frames must be at least 101 so one 100 ms window fits"));
    }
    let mut report = String::new();
    let _ = writeln!(report, "reference loader rate: {REFERENCE_LOADER_RATE:.2e} events/s");
    let _ = writeln!(report, "threads: {}", rayon::current_num_threads());

    let (rate, n) = loader_rate(args)?;
    let _ = writeln!(
        report,
        "loader:    {rate:.3e} events/s ({n} events, {:.2}x reference)",
        rate / REFERENCE_LOADER_RATE
    );

    let g = SensorGeometry::default();
    let sampler = SceneSampler::default();
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let seconds = (args.frames as f64 / 1000.0).ceil() as usize;
    let scene = sampler.sample_scene(g, seconds, &mut rng);
    let mut sim = Simulator::new(scene, CameraConfig::default(), sampler, rng)?;
    let mut events = Vec::new();
    let t0 = Instant::now();
    for _ in 0..args.frames {
        sim.advance(&mut events)?;
    }
    let fps = args.frames as f64 / t0.elapsed().as_secs_f64();
    let _ = writeln!(report, "simulator: {fps:.0} frames/s at 240x180 ({} events)", events.len());

    let mut acc = LnesAccumulator::new(g);
    let mut image = WindowImage::zeros(RepresentationKind::Lnes, g, 0, 0);
    let end = args.frames as Micros * 1000;
    let mut windows = 0usize;
    let t0 = Instant::now();
    for w in slide_windows(&events, 100_000, 1_000)?.with_span(WindowSpan::FullWithin(end)) {
        acc.render_into(&w, &mut image)?;
        black_box(&image);
        windows += 1;
    }
    let wps = windows as f64 / t0.elapsed().as_secs_f64();
    let _ = writeln!(report, "lnes:      {wps:.0} windows/s at 240x180, 100 ms every 1 ms ({windows} windows)");

    print!("{report}");
    if let Some(path) = &args.output {
        write_all(path, report.as_bytes())?;
    }
    Ok(())
}
