use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const POSE_DIM: usize = 12;

/// 12-D hand state: six articulation coefficients, root translation in
/// meters and root rotation as an axis-angle vector in radians.
///
/// Components are stored in metadata-file order: `[alpha; 6]`,
/// `[translation; 3]`, `[rotation; 3]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PoseVector(pub [f64; POSE_DIM]);

impl PoseVector {
    pub const ALPHA: std::ops::Range<usize> = 0..6;
    pub const TRANSLATION: std::ops::Range<usize> = 6..9;
    pub const ROTATION: std::ops::Range<usize> = 9..12;

    pub fn from_parts(alpha: [f64; 6], translation: [f64; 3], rotation: [f64; 3]) -> Self {
        let mut v = [0.0; POSE_DIM];
        v[Self::ALPHA].copy_from_slice(&alpha);
        v[Self::TRANSLATION].copy_from_slice(&translation);
        v[Self::ROTATION].copy_from_slice(&rotation);
        PoseVector(v)
    }

    pub fn from_slice(values: &[f64]) -> Result<Self> {
        let arr: [f64; POSE_DIM] = values.try_into().map_err(|_| Error::DimensionMismatch {
            expected: format!("{POSE_DIM} pose components"),
            actual: format!("{}", values.len()),
        })?;
        Ok(PoseVector(arr))
    }

    pub fn alpha(&self) -> &[f64] {
        &self.0[Self::ALPHA]
    }

    pub fn translation(&self) -> [f64; 3] {
        [self.0[6], self.0[7], self.0[8]]
    }

    pub fn rotation(&self) -> [f64; 3] {
        [self.0[9], self.0[10], self.0[11]]
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl From<[f64; POSE_DIM]> for PoseVector {
    fn from(v: [f64; POSE_DIM]) -> Self {
        PoseVector(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parts_land_in_file_order() {
        let p = PoseVector::from_parts([1.0; 6], [2.0, 3.0, 4.0], [5.0, 6.0, 7.0]);
        assert_eq!(p.alpha(), &[1.0; 6]);
        assert_eq!(p.translation(), [2.0, 3.0, 4.0]);
        assert_eq!(p.rotation(), [5.0, 6.0, 7.0]);
        assert!(PoseVector::from_slice(&[0.0; 11]).is_err());
    }
}
