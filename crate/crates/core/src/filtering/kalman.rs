//! Constant-velocity Kalman filter over the 12-D pose.
//!
//! The state interleaves each coordinate with its velocity:
//! `[θ₁, θ̇₁, θ₂, θ̇₂, …, θ₁₂, θ̇₁₂]`, so coordinate `i` lives at index `2i` and
//! its velocity at `2i + 1`. Observations are the 12 positions.

use nalgebra::{SMatrix, SVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pose::{PoseVector, POSE_DIM};

pub const STATE_DIM: usize = 2 * POSE_DIM;

pub type StateVector = SVector<f64, STATE_DIM>;
pub type Covariance = SMatrix<f64, STATE_DIM, STATE_DIM>;
type ObsMatrix = SMatrix<f64, POSE_DIM, POSE_DIM>;
type Gain = SMatrix<f64, STATE_DIM, POSE_DIM>;

/// Prior variance of a freshly initialised state.
pub const DEFAULT_INITIAL_VARIANCE: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterSettings {
    /// σ² of the white-noise process covariance.
    pub process_sigma2: f64,
    /// Isotropic observation variance `v`.
    pub observation_noise: f64,
    /// Step duration in prediction steps.
    pub dt: f64,
}

impl FilterSettings {
    /// Settings for slow hand motion.
    pub const SLOW: FilterSettings = FilterSettings {
        process_sigma2: 0.1,
        observation_noise: 5.0,
        dt: 1.0,
    };

    /// Settings for fast hand motion.
    pub const FAST: FilterSettings = FilterSettings {
        process_sigma2: 3.0,
        observation_noise: 1.0,
        dt: 1.0,
    };

    pub fn new(process_sigma2: f64, observation_noise: f64, dt: f64) -> Result<Self> {
        let s = FilterSettings {
            process_sigma2,
            observation_noise,
            dt,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.process_sigma2 >= 0.0 && self.process_sigma2.is_finite()) {
            return Err(Error::invalid("process_sigma2", format!("{} is not a finite value >= 0", self.process_sigma2)));
        }
        if !(self.observation_noise > 0.0 && self.observation_noise.is_finite()) {
            return Err(Error::invalid(
                "observation_noise",
                format!("{} is not a finite value > 0", self.observation_noise),
            ));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid("dt", format!("{} is not a finite value > 0", self.dt)));
        }
        Ok(())
    }
}

impl Default for FilterSettings {
    fn default() -> Self {
        FilterSettings::SLOW
    }
}

/// One position/velocity block of the white-noise covariance.
pub fn white_noise_block(sigma2: f64, dt: f64) -> [[f64; 2]; 2] {
    let dt2 = dt * dt;
    [
        [sigma2 * 0.25 * dt2 * dt2, sigma2 * 0.5 * dt2 * dt],
        [sigma2 * 0.5 * dt2 * dt, sigma2 * dt2],
    ]
}

/// Block-diagonal process covariance with 12 copies of
/// `σ²·[[Δt⁴/4, Δt³/2], [Δt³/2, Δt²]]`. Expects `sigma2 >= 0` and `dt > 0`.
pub fn white_noise_cov(sigma2: f64, dt: f64) -> Covariance {
    let b = white_noise_block(sigma2, dt);
    let mut q = Covariance::zeros();
    for i in 0..POSE_DIM {
        let k = 2 * i;
        q[(k, k)] = b[0][0];
        q[(k, k + 1)] = b[0][1];
        q[(k + 1, k)] = b[1][0];
        q[(k + 1, k + 1)] = b[1][1];
    }
    q
}

#[derive(Debug, Clone, PartialEq)]
pub struct KalmanState {
    pub state: StateVector,
    pub covariance: Covariance,
}

impl KalmanState {
    /// Positions from `pose`, zero velocities, covariance `variance·I`.
    pub fn from_observation(pose: &PoseVector, variance: f64) -> Self {
        let mut state = StateVector::zeros();
        for (i, &v) in pose.0.iter().enumerate() {
            state[2 * i] = v;
        }
        KalmanState {
            state,
            covariance: Covariance::identity() * variance,
        }
    }

    pub fn positions(&self) -> PoseVector {
        PoseVector(std::array::from_fn(|i| self.state[2 * i]))
    }

    pub fn velocities(&self) -> [f64; POSE_DIM] {
        std::array::from_fn(|i| self.state[2 * i + 1])
    }

    /// Largest `|P - Pᵀ|` entry.
    pub fn asymmetry(&self) -> f64 {
        let p = &self.covariance;
        (p - p.transpose()).amax()
    }

    /// Smallest eigenvalue of the symmetrised covariance.
    pub fn min_eigenvalue(&self) -> f64 {
        let p = &self.covariance;
        let sym = (p + p.transpose()) * 0.5;
        sym.symmetric_eigenvalues().min()
    }
}

fn symmetrize(p: &mut Covariance) {
    for r in 0..STATE_DIM {
        for c in r + 1..STATE_DIM {
            let m = 0.5 * (p[(r, c)] + p[(c, r)]);
            p[(r, c)] = m;
            p[(c, r)] = m;
        }
    }
}

/// `x ← F x`, `P ← F P Fᵀ + ω(σ²)` with `F` the per-coordinate
/// `[[1, Δt], [0, 1]]` transition.
pub fn predict(state: &KalmanState, settings: &FilterSettings) -> KalmanState {
    let dt = settings.dt;
    let mut x = state.state;
    for i in 0..POSE_DIM {
        x[2 * i] += dt * x[2 * i + 1];
    }
    // F only mixes each velocity row/column into its position row/column.
    let mut p = state.covariance;
    for i in 0..POSE_DIM {
        let (pos, vel) = (2 * i, 2 * i + 1);
        for c in 0..STATE_DIM {
            p[(pos, c)] += dt * p[(vel, c)];
        }
    }
    for i in 0..POSE_DIM {
        let (pos, vel) = (2 * i, 2 * i + 1);
        for r in 0..STATE_DIM {
            p[(r, pos)] += dt * p[(r, vel)];
        }
    }
    let b = white_noise_block(settings.process_sigma2, dt);
    for i in 0..POSE_DIM {
        let k = 2 * i;
        p[(k, k)] += b[0][0];
        p[(k, k + 1)] += b[0][1];
        p[(k + 1, k)] += b[1][0];
        p[(k + 1, k + 1)] += b[1][1];
    }
    symmetrize(&mut p);
    KalmanState { state: x, covariance: p }
}

/// Standard update with `R = v·I`. Returns the updated state and the ℓ2 norm
/// of the innovation. The covariance uses the Joseph form and is
/// symmetrised.
pub fn update(state: &KalmanState, observation: &PoseVector, settings: &FilterSettings) -> Result<(KalmanState, f64)> {
    if !observation.is_finite() {
        return Err(Error::invalid("observation", "contains a non-finite value"));
    }
    let p = &state.covariance;
    let x = &state.state;
    let v = settings.observation_noise;

    let innovation = SVector::<f64, POSE_DIM>::from_fn(|i, _| observation.0[i] - x[2 * i]);
    let mut s = ObsMatrix::from_fn(|r, c| p[(2 * r, 2 * c)]);
    for i in 0..POSE_DIM {
        s[(i, i)] += v;
    }
    let s_chol = s
        .cholesky()
        .ok_or_else(|| Error::invalid("covariance", "innovation covariance is not positive definite"))?;
    // K = P Hᵀ S⁻¹, computed as (S⁻¹ H P)ᵀ since S and P are symmetric.
    let hp = SMatrix::<f64, POSE_DIM, STATE_DIM>::from_fn(|r, c| p[(2 * r, c)]);
    let gain: Gain = s_chol.solve(&hp).transpose();

    let new_x = x + gain * innovation;

    let mut a = Covariance::identity();
    for r in 0..STATE_DIM {
        for i in 0..POSE_DIM {
            a[(r, 2 * i)] -= gain[(r, i)];
        }
    }
    let mut new_p = a * p * a.transpose() + gain * gain.transpose() * v;
    symmetrize(&mut new_p);
    Ok((
        KalmanState {
            state: new_x,
            covariance: new_p,
        },
        innovation.norm(),
    ))
}

/// Output of one filter step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Filtered {
    pub pose: PoseVector,
    /// Innovation norm; zero on the initialising step.
    pub residual: f64,
}

/// Stateful filter: the first observation initialises the state, later ones
/// run predict then update.
#[derive(Debug, Clone)]
pub struct KalmanFilter {
    settings: FilterSettings,
    initial_variance: f64,
    state: Option<KalmanState>,
}

impl KalmanFilter {
    pub fn new(settings: FilterSettings) -> Result<Self> {
        settings.validate()?;
        Ok(KalmanFilter {
            settings,
            initial_variance: DEFAULT_INITIAL_VARIANCE,
            state: None,
        })
    }

    pub fn with_initial_variance(mut self, variance: f64) -> Result<Self> {
        if !(variance > 0.0 && variance.is_finite()) {
            return Err(Error::invalid("initial_variance", format!("{variance} is not a finite value > 0")));
        }
        self.initial_variance = variance;
        Ok(self)
    }

    pub fn settings(&self) -> &FilterSettings {
        &self.settings
    }

    /// Switches settings; the state is kept.
    pub fn set_settings(&mut self, settings: FilterSettings) -> Result<()> {
        settings.validate()?;
        self.settings = settings;
        Ok(())
    }

    pub fn state(&self) -> Option<&KalmanState> {
        self.state.as_ref()
    }

    pub fn reset(&mut self) {
        self.state = None;
    }

    pub fn step(&mut self, observation: &PoseVector) -> Result<Filtered> {
        let (next, residual) = match &self.state {
            None => {
                if !observation.is_finite() {
                    return Err(Error::invalid("observation", "contains a non-finite value"));
                }
                (KalmanState::from_observation(observation, self.initial_variance), 0.0)
            }
            Some(s) => update(&predict(s, &self.settings), observation, &self.settings)?,
        };
        let pose = next.positions();
        self.state = Some(next);
        Ok(Filtered { pose, residual })
    }
}
