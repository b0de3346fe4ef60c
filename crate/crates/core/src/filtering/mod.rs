//! Temporal filtering of pose predictions.

pub mod kalman;
pub mod scheduler;

pub use kalman::{
    predict, update, white_noise_block, white_noise_cov, Covariance, FilterSettings, Filtered, KalmanFilter,
    KalmanState, StateVector, DEFAULT_INITIAL_VARIANCE, STATE_DIM,
};
pub use scheduler::{
    lnes_information, mode_for_residual, Action, Mode, Observation, ResidualMode, Scheduler, SchedulerConfig,
};
