//! Window scheduling for slow or stationary hands, and the slow/fast switch
//! of the main filter.
//!
//! Per 1 ms tick the caller reports how many events arrived. A new LNES is
//! only worth building once enough events accumulated since the last one;
//! once built, its information (pixel sum) is averaged over the recent
//! history to tell a moving hand from sensor noise. When a prediction is
//! made, a probe filter with slow settings watches the raw predictions and
//! its residual picks the settings of the main filter.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filtering::kalman::{FilterSettings, Filtered, KalmanFilter};
use crate::pose::PoseVector;
use crate::representations::{RepresentationKind, WindowImage};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Action {
    /// Run the network on the latest LNES.
    EmitNewPrediction,
    /// The hand looks stationary; reuse the previous prediction.
    RepeatLast,
    /// Too few new events; wait before building an LNES.
    Defer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    Slow,
    Fast,
}

impl Mode {
    pub fn settings(self) -> FilterSettings {
        match self {
            Mode::Slow => FilterSettings::SLOW,
            Mode::Fast => FilterSettings::FAST,
        }
    }
}

/// How the probe residual is turned into the value compared against the
/// switching threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ResidualMode {
    /// The residual of the latest update alone.
    PerUpdate,
    /// Mean over the last `window` updates.
    Averaged { window: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchedulerConfig {
    pub min_new_events: usize,
    pub history: usize,
    pub stationary_information: f64,
    pub fast_residual: f64,
    pub residual_mode: ResidualMode,
}

impl Default for SchedulerConfig {
    fn default() -> Self {
        SchedulerConfig {
            min_new_events: 10,
            history: 16,
            stationary_information: 300.0,
            fast_residual: 0.7,
            residual_mode: ResidualMode::PerUpdate,
        }
    }
}

impl SchedulerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.history == 0 {
            return Err(Error::invalid("history", "must hold at least one window"));
        }
        if let ResidualMode::Averaged { window: 0 } = self.residual_mode {
            return Err(Error::invalid("residual_mode", "averaging window must be at least 1"));
        }
        if !self.stationary_information.is_finite() || !self.fast_residual.is_finite() {
            return Err(Error::invalid("thresholds", "must be finite"));
        }
        Ok(())
    }
}

/// Sum of all LNES values over both channels.
pub fn lnes_information(image: &WindowImage) -> Result<f64> {
    if image.kind != RepresentationKind::Lnes {
        return Err(Error::WrongRepresentation {
            kind: image.kind,
            expected: "an LNES",
        });
    }
    Ok(image.total())
}

/// Fast iff `residual >= threshold`.
pub fn mode_for_residual(residual: f64, threshold: f64) -> Mode {
    if residual >= threshold {
        Mode::Fast
    } else {
        Mode::Slow
    }
}

/// Result of feeding one raw prediction through [`Scheduler::observe`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub filtered: Filtered,
    /// Residual compared against the switching threshold.
    pub probe_residual: f64,
    pub mode: Mode,
}

#[derive(Debug, Clone)]
pub struct Scheduler {
    config: SchedulerConfig,
    pending: usize,
    information: VecDeque<f64>,
    residuals: VecDeque<f64>,
    probe: KalmanFilter,
    mode: Mode,
}

impl Scheduler {
    pub fn new(config: SchedulerConfig) -> Result<Self> {
        config.validate()?;
        Ok(Scheduler {
            config,
            pending: 0,
            information: VecDeque::with_capacity(config.history),
            residuals: VecDeque::new(),
            probe: KalmanFilter::new(FilterSettings::SLOW)?,
            mode: Mode::Slow,
        })
    }

    pub fn config(&self) -> &SchedulerConfig {
        &self.config
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Events seen since the last built LNES.
    pub fn pending_events(&self) -> usize {
        self.pending
    }

    /// Information of the most recent LNES windows, oldest first.
    pub fn recent_information(&self) -> impl Iterator<Item = f64> + '_ {
        self.information.iter().copied()
    }

    /// Mean information over the recorded history; `None` before the first
    /// LNES. Averages over fewer windows until the history fills up.
    pub fn average_information(&self) -> Option<f64> {
        (!self.information.is_empty()).then(|| self.information.iter().sum::<f64>() / self.information.len() as f64)
    }

    /// Counts `new_events`; once enough accumulated, builds the LNES through
    /// `latest_lnes` and classifies it. The closure is not called on
    /// [`Action::Defer`].
    pub fn schedule_with<F>(&mut self, new_events: usize, latest_lnes: F) -> Result<Action>
    where
        F: FnOnce() -> Result<WindowImage>,
    {
        let pending = self.pending.saturating_add(new_events);
        if pending < self.config.min_new_events {
            self.pending = pending;
            return Ok(Action::Defer);
        }
        let info = lnes_information(&latest_lnes()?)?;
        self.pending = 0;
        if self.information.len() == self.config.history {
            self.information.pop_front();
        }
        self.information.push_back(info);
        let average = self.average_information().expect("just pushed");
        Ok(if average < self.config.stationary_information {
            Action::RepeatLast
        } else {
            Action::EmitNewPrediction
        })
    }

    pub fn schedule(&mut self, new_events: usize, latest_lnes: &WindowImage) -> Result<Action> {
        self.schedule_with(new_events, || Ok(latest_lnes.clone()))
    }

    /// Runs the probe filter on a raw prediction, switches `main` to the
    /// settings of the resulting mode and filters the prediction with it.
    pub fn observe(&mut self, raw: &PoseVector, main: &mut KalmanFilter) -> Result<Observation> {
        let residual = self.probe.step(raw)?.residual;
        let probe_residual = match self.config.residual_mode {
            ResidualMode::PerUpdate => residual,
            ResidualMode::Averaged { window } => {
                if self.residuals.len() == window {
                    self.residuals.pop_front();
                }
                self.residuals.push_back(residual);
                self.residuals.iter().sum::<f64>() / self.residuals.len() as f64
            }
        };
        self.mode = mode_for_residual(probe_residual, self.config.fast_residual);
        main.set_settings(self.mode.settings())?;
        let filtered = main.step(raw)?;
        Ok(Observation {
            filtered,
            probe_residual,
            mode: self.mode,
        })
    }
}
