use std::path::PathBuf;

use clap::{Args, ValueEnum};
use eventforge::filtering::{Action, FilterSettings, KalmanFilter, Mode, Scheduler, SchedulerConfig};
use eventforge::format::{decode_events, decode_metadata, encode_poses, DEFAULT_STEP_MICROS};
use eventforge::representations::build_lnes;
use eventforge::window::EventWindow;
use eventforge::{Event, Micros, PoseVector, SensorGeometry};

use crate::error::{CliError, CliResult};
use crate::io::{manifest_beside, read_all, write_all};
use crate::manifest::RunManifest;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FilterMode {
    Slow,
    Fast,
    /// Switch between slow and fast with a probe filter's residual.
    Auto,
}

#[derive(Debug, Args)]
pub struct FilterArgs {
    /// Metadata stream of raw 12-D pose predictions, one frame per step.
    pub input: PathBuf,
    /// Filtered metadata stream; `-` for stdout.
    #[arg(short = 'o', long)]
    pub output: PathBuf,
    #[arg(long, value_enum, default_value_t = FilterMode::Auto)]
    pub mode: FilterMode,
    /// Process noise σ² (slow/fast modes only).
    #[arg(long)]
    pub sigma2: Option<f64>,
    /// Observation noise variance (slow/fast modes only).
    #[arg(long)]
    pub obs_noise: Option<f64>,
    /// Event stream of the same recording; enables skipping steps with few
    /// new events or little motion.
    #[arg(long)]
    pub events: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_STEP_MICROS)]
    pub step_us: Micros,
    /// Length of the LNES used to judge motion, in microseconds.
    #[arg(long, default_value_t = 100_000)]
    pub lnes_us: Micros,
    #[arg(long, default_value_t = 240)]
    pub width: u16,
    #[arg(long, default_value_t = 180)]
    pub height: u16,
    /// Per-step CSV of action, mode and probe residual.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

struct Gate<'a> {
    events: &'a [Event],
    per_step: Vec<usize>,
    scheduler: Scheduler,
}

#[derive(Debug, Default)]
struct Tally {
    emitted: usize,
    repeated: usize,
    deferred: usize,
    fast: usize,
}

fn settings_for(args: &FilterArgs) -> CliResult<FilterSettings> {
    let base = match args.mode {
        FilterMode::Slow => FilterSettings::SLOW,
        FilterMode::Fast => FilterSettings::FAST,
        FilterMode::Auto => {
            if args.sigma2.is_some() || args.obs_noise.is_some() {
                return Err(CliError::usage("--sigma2 and --obs-noise apply to --mode slow or fast only"));
            }
            FilterSettings::SLOW
        }
    };
    Ok(FilterSettings::new(
        args.sigma2.unwrap_or(base.process_sigma2),
        args.obs_noise.unwrap_or(base.observation_noise),
        base.dt,
    )?)
}

pub fn run(args: &FilterArgs) -> CliResult<()> {
    let settings = settings_for(args)?;
    let geometry = SensorGeometry::new(args.width, args.height)?;
    if args.lnes_us == 0 {
        return Err(CliError::usage("--lnes-us must be at least 1"));
    }
    let metadata = decode_metadata(&read_all(&args.input)?).map_err(|e| CliError::data(format!("{}: {e}", args.input.display())))?;
    let raw = metadata.poses().map_err(|e| CliError::data(format!("{}: {e}", args.input.display())))?;

    let decoded = match &args.events {
        Some(path) => Some(decode_events(&read_all(path)?, args.step_us).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?),
        None => None,
    };
    let mut gate = match &decoded {
        Some(d) => {
            if d.steps != raw.len() {
                return Err(CliError::data(format!(
                    "metadata has {} frames but the event stream has {} ticks",
                    raw.len(),
                    d.steps
                )));
            }
            let mut per_step = vec![0usize; d.steps];
            for e in &d.events {
                if let Some(n) = per_step.get_mut((e.t / args.step_us) as usize) {
                    *n += 1;
                }
            }
            Some(Gate {
                events: &d.events,
                per_step,
                scheduler: Scheduler::new(SchedulerConfig::default())?,
            })
        }
        None => None,
    };

    let mut probe_scheduler = Scheduler::new(SchedulerConfig::default())?;
    let mut main = KalmanFilter::new(settings)?;
    let mut out: Vec<PoseVector> = Vec::with_capacity(raw.len());
    let mut trace = String::from("step,action,mode,probe_residual,residual\n");
    let mut tally = Tally::default();

    for (k, pose) in raw.iter().enumerate() {
        let action = match gate.as_mut() {
            Some(g) if !out.is_empty() => {
                let end = (k as Micros + 1) * args.step_us;
                let start = end.saturating_sub(args.lnes_us);
                let window = EventWindow::from_sorted(g.events, start, end - start);
                g.scheduler
                    .schedule_with(g.per_step[k], || build_lnes(&window, geometry))
                    .map_err(|e| CliError::data(format!("step {k}: {e}")))?
            }
            _ => Action::EmitNewPrediction,
        };
        let (mode, probe, residual) = match action {
            Action::EmitNewPrediction => {
                let (filtered, mode, probe) = if args.mode == FilterMode::Auto {
                    let obs = probe_scheduler.observe(pose, &mut main).map_err(|e| CliError::data(format!("step {k}: {e}")))?;
                    (obs.filtered, obs.mode, Some(obs.probe_residual))
                } else {
                    let f = main.step(pose).map_err(|e| CliError::data(format!("step {k}: {e}")))?;
                    let mode = if args.mode == FilterMode::Fast { Mode::Fast } else { Mode::Slow };
                    (f, mode, None)
                };
                out.push(filtered.pose);
                tally.emitted += 1;
                (mode, probe, Some(filtered.residual))
            }
            Action::RepeatLast | Action::Defer => {
                let last = *out.last().expect("first step always emits");
                out.push(last);
                if action == Action::RepeatLast {
                    tally.repeated += 1;
                } else {
                    tally.deferred += 1;
                }
                (probe_scheduler.mode(), None, None)
            }
        };
        if mode == Mode::Fast {
            tally.fast += 1;
        }
        if args.trace.is_some() {
            let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
            trace.push_str(&format!(
                "{k},{},{},{},{}\n",
                match action {
                    Action::EmitNewPrediction => "emit",
                    Action::RepeatLast => "repeat",
                    Action::Defer => "defer",
                },
                match mode {
                    Mode::Slow => "slow",
                    Mode::Fast => "fast",
                },
                opt(probe),
                opt(residual)
            ));
        }
    }

    write_all(&args.output, &encode_poses(&out))?;
    if let Some(path) = &args.trace {
        write_all(path, trace.as_bytes())?;
    }
    eprintln!(
        "{} steps: {} filtered, {} repeated, {} deferred; fast mode on {} step(s)",
        out.len(),
        tally.emitted,
        tally.repeated,
        tally.deferred,
        tally.fast
    );
    if let Some(path) = manifest_beside(&args.output) {
        let mut m = RunManifest::new("filter")
            .input(&args.input)
            .output(&args.output)
            .param("mode", format!("{:?}", args.mode).to_lowercase())
            .param("process_sigma2", settings.process_sigma2)
            .param("observation_noise", settings.observation_noise);
        if let Some(events) = &args.events {
            m = m
                .input(events)
                .param("step_us", args.step_us)
                .param("lnes_us", args.lnes_us)
                .param("width", args.width)
                .param("height", args.height);
        }
        if let Some(trace) = &args.trace {
            m = m.output(trace);
        }
        m.write(&path)?;
    }
    Ok(())
}
