//! Two-light Lambertian shading and the RGB to log-brightness conversion.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::event::{Micros, SensorGeometry};
use crate::simulator::camera::LogBrightnessFrame;

pub type Rgb = [f64; 3];

const UNIT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LightingConfig {
    /// Unit direction towards the first light.
    pub l1: [f64; 3],
    pub l2: [f64; 3],
    pub c1: Rgb,
    pub c2: Rgb,
    pub c_ambient: Rgb,
}

impl Default for LightingConfig {
    fn default() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        LightingConfig {
            l1: [0.0, 0.0, 1.0],
            l2: [s, 0.0, s],
            c1: [0.45; 3],
            c2: [0.45; 3],
            c_ambient: [0.1; 3],
        }
    }
}

impl LightingConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, l) in [("l1", self.l1), ("l2", self.l2)] {
            if (norm(l) - 1.0).abs() > UNIT_TOLERANCE {
                return Err(Error::invalid(name, format!("light direction {l:?} is not unit length")));
            }
        }
        for (name, c) in [("c1", self.c1), ("c2", self.c2), ("c_ambient", self.c_ambient)] {
            if c.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::invalid(name, format!("colour {c:?} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

#[inline]
pub(crate) fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub(crate) fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

/// Shading without the unit-normal check; `normal` must be unit length.
#[inline]
pub fn shade_unchecked(normal: [f64; 3], albedo: Rgb, lighting: &LightingConfig) -> Rgb {
    let d1 = dot(normal, lighting.l1).max(0.0);
    let d2 = dot(normal, lighting.l2).max(0.0);
    let mut out = [0.0; 3];
    for k in 0..3 {
        let light = d1 * lighting.c1[k] + d2 * lighting.c2[k] + lighting.c_ambient[k];
        out[k] = (light * albedo[k]).clamp(0.0, 1.0);
    }
    out
}

/// Linear colour of a surface point: `(<n,l1> c1 + <n,l2> c2 + c_ambient) * albedo`,
/// with back-facing dot products clamped to zero and the result clamped to `[0, 1]`.
pub fn shade(normal: [f64; 3], albedo: Rgb, lighting: &LightingConfig) -> Result<Rgb> {
    if (norm(normal) - 1.0).abs() > UNIT_TOLERANCE {
        return Err(Error::invalid("normal", format!("{normal:?} is not unit length")));
    }
    Ok(shade_unchecked(normal, albedo, lighting))
}

/// Luma-weighted log-brightness of one pixel with channels in `[0, 255]`.
#[inline]
pub fn log_brightness(rgb: Rgb, epsilon: f64) -> f64 {
    (0.2 * rgb[0] + 0.7 * rgb[1] + 0.1 * rgb[2] + epsilon).ln()
}

/// Row-major RGB image with channels in `[0, 255]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RgbImage {
    pub width: u16,
    pub height: u16,
    pub pixels: Vec<Rgb>,
}

impl RgbImage {
    pub fn filled(width: u16, height: u16, rgb: Rgb) -> Self {
        RgbImage {
            width,
            height,
            pixels: vec![rgb; width as usize * height as usize],
        }
    }

    pub fn get(&self, x: u16, y: u16) -> Rgb {
        self.pixels[y as usize * self.width as usize + x as usize]
    }
}

/// Converts an RGB frame to per-pixel `ln(0.2 R + 0.7 G + 0.1 B + epsilon)`.
pub fn to_log_brightness(frame: &RgbImage, epsilon: f64, timestamp: Micros) -> Result<LogBrightnessFrame> {
    let geometry = SensorGeometry::new(frame.width, frame.height)?;
    if frame.pixels.len() != geometry.pixel_count() {
        return Err(Error::DimensionMismatch {
            expected: format!("{} pixels", geometry.pixel_count()),
            actual: format!("{}", frame.pixels.len()),
        });
    }
    if !(epsilon > 0.0) {
        return Err(Error::invalid("epsilon", "must be > 0"));
    }
    let mut values = Vec::with_capacity(frame.pixels.len());
    for (i, rgb) in frame.pixels.iter().enumerate() {
        if rgb.iter().any(|c| !(0.0..=255.0).contains(c)) {
            return Err(Error::invalid(
                "frame",
                format!("pixel {i} has channel values {rgb:?} outside [0, 255]"),
            ));
        }
        values.push(log_brightness(*rgb, epsilon));
    }
    LogBrightnessFrame::new(geometry, values, timestamp)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lights(c1: Rgb, c2: Rgb, ambient: Rgb) -> LightingConfig {
        LightingConfig {
            l1: [1.0, 0.0, 0.0],
            l2: [0.0, 1.0, 0.0],
            c1,
            c2,
            c_ambient: ambient,
        }
    }

    #[test]
    fn ambient_only_when_perpendicular() {
        let l = lights([1.0; 3], [1.0; 3], [0.2; 3]);
        let c = shade([0.0, 0.0, 1.0], [1.0; 3], &l).unwrap();
        assert_eq!(c, [0.2; 3]);
    }

    #[test]
    fn single_light_facing() {
        let l = lights([0.5; 3], [0.0; 3], [0.0; 3]);
        let c = shade([1.0, 0.0, 0.0], [1.0, 0.5, 0.0], &l).unwrap();
        assert_eq!(c, [0.5, 0.25, 0.0]);
    }

    #[test]
    fn black_albedo_absorbs_everything() {
        let l = lights([1.0; 3], [1.0; 3], [1.0; 3]);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(shade([s, s, 0.0], [0.0; 3], &l).unwrap(), [0.0; 3]);
    }

    #[test]
    fn back_facing_light_is_clamped() {
        let l = lights([1.0; 3], [0.0; 3], [0.1; 3]);
        let c = shade([-1.0, 0.0, 0.0], [1.0; 3], &l).unwrap();
        assert_eq!(c, [0.1; 3]);
    }

    #[test]
    fn non_unit_normal_is_rejected() {
        assert!(shade([0.0, 0.0, 2.0], [1.0; 3], &LightingConfig::default()).is_err());
        let bad = LightingConfig {
            l1: [0.0, 0.0, 0.5],
            ..LightingConfig::default()
        };
        assert!(bad.validate().is_err());
        assert!(LightingConfig::default().validate().is_ok());
    }

    #[test]
    fn log_brightness_values() {
        let frame = RgbImage {
            width: 3,
            height: 1,
            pixels: vec![[0.0; 3], [255.0; 3], [0.0, 255.0, 0.0]],
        };
        let l = to_log_brightness(&frame, 1.0, 0).unwrap();
        assert_eq!(l.values[0], 0.0);
        assert!((l.values[1] - 256f64.ln()).abs() < 1e-12);
        assert!((l.values[1] - 5.545).abs() < 1e-3);
        assert!((l.values[2] - 179.5f64.ln()).abs() < 1e-12);
        assert!((l.values[2] - 5.190).abs() < 1e-3);
    }

    #[test]
    fn out_of_range_channel_is_rejected() {
        let frame = RgbImage::filled(2, 2, [256.0, 0.0, 0.0]);
        assert!(to_log_brightness(&frame, 1.0, 0).is_err());
    }
}
