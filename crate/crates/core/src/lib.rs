//! Event-camera tooling: a sensor simulator, the binary event and metadata
//! stream formats, window representations (LNES and count baselines), a
//! constant-velocity Kalman filter with window scheduling, threshold and
//! noise calibration, and keypoint accuracy metrics.

// `!(x > 0.0)` is used deliberately so NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibration;
pub mod error;
pub mod event;
pub mod filtering;
pub mod format;
pub mod metrics;
pub mod pose;
pub mod representations;
pub mod simulator;
pub mod window;

pub use error::{Error, Result};
pub use event::{validate_stream, Event, Micros, Polarity, SensorGeometry};
pub use format::{load_paired, PairedDataset};
pub use pose::{PoseVector, POSE_DIM};
pub use representations::{build_lnes, RepresentationKind, WindowImage};
pub use window::{slide_windows, EventWindow};
