//! TOML configuration for `simulate`.
//!
//! ```toml
//! seed = 7
//! duration = 10.0          # simulated seconds
//!
//! [camera]
//! threshold = 0.5
//! noise_rate_positive = 2500.0
//! noise_rate_negative = 100.0
//! epsilon = 1.0
//! steps_per_second = 1000
//! geometry = { width = 240, height = 180 }
//!
//! [scene]
//! shape = "sphere"         # or "disk"; random when absent
//! rerandomize_period = 50.0
//! threshold_mean = 0.5
//! threshold_variance = 0.0004
//! light_intensity_min = 0.9
//! light_intensity_max = 1.1
//! poses = { alpha = 2.0, translation_xy = 0.3, translation_z = 0.09, rotation = 0.5 }
//! ```
//!
//! Every key is optional.

use eventforge::simulator::{CameraConfig, SceneSampler};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    pub seed: Option<u64>,
    pub duration: Option<f64>,
    pub camera: CameraConfig,
    pub scene: SceneSampler,
}

impl SimulationConfig {
    pub fn parse(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    /// Parses and checks every value.
    pub fn parse_valid(text: &str) -> Result<Self, String> {
        let config = Self::parse(text).map_err(|e| e.to_string())?;
        config.validate().map_err(|e| e.to_string())?;
        Ok(config)
    }

    pub fn validate(&self) -> eventforge::Result<()> {
        self.camera.validate()?;
        self.scene.validate()?;
        if let Some(d) = self.duration {
            if !(d > 0.0 && d.is_finite()) {
                return Err(eventforge::Error::InvalidParameter {
                    name: "duration",
                    reason: format!("must be > 0, got {d}"),
                });
            }
        }
        if self.camera.geometry.height > 256 {
            return Err(eventforge::Error::InvalidParameter {
                name: "geometry.height",
                reason: format!("event files store rows in one byte; {} > 256", self.camera.geometry.height),
            });
        }
        Ok(())
    }
}
