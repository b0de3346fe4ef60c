//! Pose trajectories: one keypose per simulated second joined by quadratic
//! Bézier segments with a random middle control point.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pose::{PoseVector, POSE_DIM};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BezierTrajectory {
    /// `segments + 1` poses, one per whole simulated second.
    pub keyposes: Vec<PoseVector>,
    /// Middle control point of each segment.
    pub midpoints: Vec<PoseVector>,
}

impl BezierTrajectory {
    pub fn new(keyposes: Vec<PoseVector>, midpoints: Vec<PoseVector>) -> Result<Self> {
        if keyposes.len() < 2 || midpoints.len() + 1 != keyposes.len() {
            return Err(Error::invalid(
                "trajectory",
                format!(
                    "need n+1 keyposes for n midpoints (n >= 1), got {} and {}",
                    keyposes.len(),
                    midpoints.len()
                ),
            ));
        }
        Ok(BezierTrajectory { keyposes, midpoints })
    }

    /// A trajectory that holds one pose for `seconds`.
    pub fn stationary(pose: PoseVector, seconds: usize) -> Self {
        let seconds = seconds.max(1);
        BezierTrajectory {
            keyposes: vec![pose; seconds + 1],
            midpoints: vec![pose; seconds],
        }
    }

    /// Straight-line motion from `from` to `to` at constant speed over `seconds`.
    pub fn linear(from: PoseVector, to: PoseVector, seconds: usize) -> Self {
        let seconds = seconds.max(1);
        let lerp = |s: f64| {
            let mut v = [0.0; POSE_DIM];
            for (k, out) in v.iter_mut().enumerate() {
                *out = from.0[k] + s * (to.0[k] - from.0[k]);
            }
            PoseVector(v)
        };
        let n = seconds as f64;
        let keyposes = (0..=seconds).map(|k| lerp(k as f64 / n)).collect();
        // A midpoint halfway along the chord makes the quadratic linear in s.
        let midpoints = (0..seconds).map(|k| lerp((k as f64 + 0.5) / n)).collect();
        BezierTrajectory { keyposes, midpoints }
    }

    /// Draws `seconds` random segments with poses from `sample`.
    pub fn random<R: Rng + ?Sized>(
        seconds: usize,
        rng: &mut R,
        mut sample: impl FnMut(&mut R) -> PoseVector,
    ) -> Self {
        let seconds = seconds.max(1);
        let mut keyposes = Vec::with_capacity(seconds + 1);
        let mut midpoints = Vec::with_capacity(seconds);
        keyposes.push(sample(rng));
        for _ in 0..seconds {
            midpoints.push(sample(rng));
            keyposes.push(sample(rng));
        }
        BezierTrajectory { keyposes, midpoints }
    }

    /// Duration in simulated seconds.
    pub fn span(&self) -> f64 {
        self.midpoints.len() as f64
    }

    /// Pose at `time` seconds.
    pub fn pose_at(&self, time: f64) -> Result<PoseVector> {
        bezier_pose(self, time)
    }
}

/// Evaluates the quadratic Bézier of the segment containing `time`:
/// `(1-s)^2 P0 + 2(1-s)s Pm + s^2 P1` with `s` the fractional part of `time`.
/// At the final keypose time the last segment is evaluated at `s = 1`.
pub fn bezier_pose(trajectory: &BezierTrajectory, time: f64) -> Result<PoseVector> {
    let span = trajectory.span();
    if !(time >= 0.0 && time <= span) {
        return Err(Error::invalid(
            "time",
            format!("{time}s lies outside the trajectory span [0, {span}]s"),
        ));
    }
    let mut segment = time.floor() as usize;
    let mut s = time - segment as f64;
    if segment == trajectory.midpoints.len() {
        segment -= 1;
        s = 1.0;
    }
    let p0 = &trajectory.keyposes[segment].0;
    let pm = &trajectory.midpoints[segment].0;
    let p1 = &trajectory.keyposes[segment + 1].0;
    let (a, b, c) = ((1.0 - s) * (1.0 - s), 2.0 * (1.0 - s) * s, s * s);
    let mut v = [0.0; POSE_DIM];
    for k in 0..POSE_DIM {
        v[k] = a * p0[k] + b * pm[k] + c * p1[k];
    }
    Ok(PoseVector(v))
}
