//! Frame-based event camera simulator.
//!
//! Each step renders a log-brightness frame of the current scene, compares it
//! against the per-pixel memory frame and emits threshold-crossing events
//! plus independent noise events.

pub mod camera;
pub mod scene;
pub mod shading;
pub mod trajectory;

use rand::Rng;

pub use camera::{
    sample_noise, step, step_with_noise, CameraConfig, LogBrightnessFrame, MemoryFrame, NoiseDraw,
    StepScratch,
};
pub use scene::{
    render_rgb, Background, PoseRanges, Primitive, Renderer, SceneConfig, SceneSampler, Shape, Texture,
};
pub use shading::{log_brightness, shade, to_log_brightness, LightingConfig, Rgb, RgbImage};
pub use trajectory::{bezier_pose, BezierTrajectory};

use crate::error::{Error, Result};
use crate::event::{Event, Micros};
use crate::pose::PoseVector;

/// One stretch of simulation between re-randomisations.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub start_step: usize,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOutput {
    pub events: Vec<Event>,
    /// Ground-truth pose at every step.
    pub poses: Vec<PoseVector>,
    pub step_micros: Micros,
    pub segments: Vec<Segment>,
}

impl SimulationOutput {
    pub fn steps(&self) -> usize {
        self.poses.len()
    }
}

/// Stepwise simulator over a scene that is re-randomised every
/// `rerandomize_period` simulated seconds.
///
/// The memory frame is seeded from the first frame of every segment, so a
/// scene switch does not flood the stream.
pub struct Simulator<R> {
    config: CameraConfig,
    scene: SceneConfig,
    sampler: SceneSampler,
    renderer: Renderer,
    memory: Option<MemoryFrame>,
    frame: LogBrightnessFrame,
    scratch: StepScratch,
    rng: R,
    step_index: usize,
    segment_start: usize,
    segments: Vec<Segment>,
}

impl<R: Rng> Simulator<R> {
    pub fn new(scene: SceneConfig, config: CameraConfig, sampler: SceneSampler, rng: R) -> Result<Self> {
        config.validate()?;
        sampler.validate()?;
        let renderer = Renderer::new(&scene, config.geometry, config.epsilon)?;
        let frame = LogBrightnessFrame::filled(config.geometry, 0.0, 0);
        let segments = vec![Segment {
            start_step: 0,
            threshold: config.threshold,
        }];
        Ok(Simulator {
            config,
            scene,
            sampler,
            renderer,
            memory: None,
            frame,
            scratch: StepScratch::default(),
            rng,
            step_index: 0,
            segment_start: 0,
            segments,
        })
    }

    pub fn config(&self) -> &CameraConfig {
        &self.config
    }

    pub fn scene(&self) -> &SceneConfig {
        &self.scene
    }

    /// The log-brightness frame rendered by the last step.
    pub fn frame(&self) -> &LogBrightnessFrame {
        &self.frame
    }

    pub fn memory(&self) -> Option<&MemoryFrame> {
        self.memory.as_ref()
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    fn period_steps(&self) -> Option<usize> {
        let p = self.scene.rerandomize_period * self.config.steps_per_second as f64;
        (p.is_finite() && p >= 1.0).then(|| p.round() as usize)
    }

    fn rerandomize(&mut self) -> Result<()> {
        let seconds = self.scene.rerandomize_period.ceil().max(1.0) as usize;
        self.scene = self.sampler.sample_scene(self.config.geometry, seconds, &mut self.rng);
        self.config.threshold = self.sampler.sample_threshold(&mut self.rng);
        self.renderer.reset(&self.scene)?;
        self.memory = None;
        self.segment_start = self.step_index;
        self.segments.push(Segment {
            start_step: self.step_index,
            threshold: self.config.threshold,
        });
        Ok(())
    }

    /// Advances one step, appending its events to `out`; returns the
    /// ground-truth pose of the rendered frame.
    pub fn advance(&mut self, out: &mut Vec<Event>) -> Result<PoseVector> {
        if let Some(period) = self.period_steps() {
            if self.step_index > self.segment_start && (self.step_index - self.segment_start).is_multiple_of(period) {
                self.rerandomize()?;
            }
        }
        let sps = self.config.steps_per_second as f64;
        let local_time = (self.step_index - self.segment_start) as f64 / sps;
        let pose = self.scene.trajectory.pose_at(local_time)?;
        let values = self.renderer.render(&self.scene, &pose);
        self.frame.values.copy_from_slice(values);
        self.frame.timestamp = self.step_index as Micros * self.config.step_micros();
        let memory = self
            .memory
            .get_or_insert_with(|| MemoryFrame::from_frame(&self.frame));
        step(memory, &self.frame, &self.config, &mut self.rng, &mut self.scratch, out)?;
        self.step_index += 1;
        Ok(pose)
    }

    pub fn into_segments(self) -> Vec<Segment> {
        self.segments
    }
}

/// Number of steps in `duration` simulated seconds.
pub fn step_count(duration: f64, config: &CameraConfig) -> Result<usize> {
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(Error::invalid("duration", format!("must be > 0, got {duration}")));
    }
    Ok((duration * config.steps_per_second as f64).round() as usize)
}

/// Runs a whole simulation of `duration` seconds.
///
/// Re-randomisation draws new scenes (and thresholds) from `SceneSampler`
/// defaults with the scene's own period.
pub fn simulate<R: Rng>(scene: SceneConfig, config: CameraConfig, duration: f64, rng: R) -> Result<SimulationOutput> {
    let sampler = SceneSampler {
        rerandomize_period: scene.rerandomize_period,
        ..SceneSampler::default()
    };
    simulate_with(scene, config, sampler, duration, rng)
}

pub fn simulate_with<R: Rng>(
    scene: SceneConfig,
    config: CameraConfig,
    sampler: SceneSampler,
    duration: f64,
    rng: R,
) -> Result<SimulationOutput> {
    let steps = step_count(duration, &config)?;
    let step_micros = config.step_micros();
    let mut sim = Simulator::new(scene, config, sampler, rng)?;
    let mut events = Vec::new();
    let mut poses = Vec::with_capacity(steps);
    for _ in 0..steps {
        poses.push(sim.advance(&mut events)?);
    }
    Ok(SimulationOutput {
        events,
        poses,
        step_micros,
        segments: sim.into_segments(),
    })
}
