//! Procedural scenes: a textured sphere or disk in front of a background
//! image, posed by a [`PoseVector`] and lit by two Lambertian lights.
//!
//! Pose mapping:
//! - translation `x, y` moves the primitive centre across the image plane,
//! - translation `z` scales it as a pinhole camera would,
//! - rotation turns the solid checker texture (and tilts a disk's normal),
//! - `alpha[0..2]` stretch the outline, `alpha[2]` shifts the texture phase.

use nalgebra::{Rotation3, Vector3};
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::event::SensorGeometry;
use crate::pose::PoseVector;
use crate::simulator::shading::{log_brightness, shade_unchecked, LightingConfig, Rgb, RgbImage};
use crate::simulator::trajectory::BezierTrajectory;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Sphere,
    Disk,
}

/// Solid 3-D checkerboard between two albedos.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Texture {
    pub albedo_a: Rgb,
    pub albedo_b: Rgb,
    /// Checker cells per primitive radius.
    pub cells_per_radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Primitive {
    pub shape: Shape,
    /// Radius in pixels at zero depth offset.
    pub radius_px: f64,
    pub texture: Texture,
}

/// A background image at least as large as the sensor, and the sensor-sized
/// region cut out of it.
#[derive(Debug, Clone, PartialEq)]
pub struct Background {
    pub image: RgbImage,
    pub crop_x: u16,
    pub crop_y: u16,
}

impl Background {
    pub fn uniform(geometry: SensorGeometry, rgb: Rgb) -> Self {
        Background {
            image: RgbImage::filled(geometry.width, geometry.height, rgb),
            crop_x: 0,
            crop_y: 0,
        }
    }

    /// A smooth random colour field: a few superposed plane waves.
    pub fn procedural<R: Rng + ?Sized>(width: u16, height: u16, rng: &mut R) -> Self {
        let waves: Vec<([f64; 2], f64, Rgb)> = (0..6)
            .map(|_| {
                let angle = rng.random_range(0.0..std::f64::consts::TAU);
                let freq = rng.random_range(0.01..0.08);
                let phase = rng.random_range(0.0..std::f64::consts::TAU);
                let tint = [
                    rng.random_range(0.3..1.0),
                    rng.random_range(0.3..1.0),
                    rng.random_range(0.3..1.0),
                ];
                ([freq * angle.cos(), freq * angle.sin()], phase, tint)
            })
            .collect();
        let base: Rgb = [
            rng.random_range(40.0..160.0),
            rng.random_range(40.0..160.0),
            rng.random_range(40.0..160.0),
        ];
        let mut pixels = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                let mut rgb = base;
                for (k, phase, tint) in &waves {
                    let s = (k[0] * x as f64 + k[1] * y as f64 + phase).sin() * 15.0;
                    for c in 0..3 {
                        rgb[c] += s * tint[c];
                    }
                }
                pixels.push(rgb.map(|v| v.clamp(0.0, 255.0)));
            }
        }
        Background {
            image: RgbImage {
                width,
                height,
                pixels,
            },
            crop_x: 0,
            crop_y: 0,
        }
    }

    fn validate(&self, geometry: SensorGeometry) -> Result<()> {
        let fits = |crop: u16, len: u16, img: u16| crop as u32 + len as u32 <= img as u32;
        if !fits(self.crop_x, geometry.width, self.image.width)
            || !fits(self.crop_y, geometry.height, self.image.height)
        {
            return Err(Error::DimensionMismatch {
                expected: format!(
                    "background covering {}x{} at crop ({}, {})",
                    geometry.width, geometry.height, self.crop_x, self.crop_y
                ),
                actual: format!("{}x{}", self.image.width, self.image.height),
            });
        }
        if self.image.pixels.len() != self.image.width as usize * self.image.height as usize {
            return Err(Error::invalid("background", "pixel buffer does not match its dimensions"));
        }
        if let Some(i) = self
            .image
            .pixels
            .iter()
            .position(|p| p.iter().any(|c| !(0.0..=255.0).contains(c)))
        {
            return Err(Error::invalid("background", format!("pixel {i} outside [0, 255]")));
        }
        Ok(())
    }

    #[inline]
    fn sensor_pixel(&self, x: u16, y: u16) -> Rgb {
        self.image.get(x + self.crop_x, y + self.crop_y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneConfig {
    pub primitive: Primitive,
    pub background: Background,
    pub trajectory: BezierTrajectory,
    pub lighting: LightingConfig,
    /// Simulated seconds between re-randomisations; infinite disables them.
    pub rerandomize_period: f64,
}

pub const DEFAULT_RERANDOMIZE_PERIOD: f64 = 50.0;

impl SceneConfig {
    pub fn validate(&self, geometry: SensorGeometry) -> Result<()> {
        self.lighting.validate()?;
        self.background.validate(geometry)?;
        if !(self.primitive.radius_px > 0.0 && self.primitive.radius_px.is_finite()) {
            return Err(Error::invalid("radius_px", "must be positive and finite"));
        }
        if !(self.primitive.texture.cells_per_radius > 0.0) {
            return Err(Error::invalid("cells_per_radius", "must be positive"));
        }
        if !(self.rerandomize_period > 0.0) {
            return Err(Error::invalid("rerandomize_period", "must be positive"));
        }
        Ok(())
    }
}

/// `v.floor() as i64` without a libm call on targets lacking a rounding
/// instruction.
#[inline]
fn floor_i64(v: f64) -> i64 {
    let t = v as i64;
    t - ((t as f64) > v) as i64
}

/// Image-plane placement of the primitive for one pose.
#[derive(Debug, Clone)]
pub struct Placement {
    cx: f64,
    cy: f64,
    rx: f64,
    ry: f64,
    /// Inverse rotation, applied to surface points for texturing.
    inv_rotation: Rotation3<f64>,
    disk_normal: [f64; 3],
    texture_scale: f64,
    phase: f64,
}

/// Pixels per metre of lateral translation, relative to sensor width.
const LATERAL_SCALE: f64 = 1.0 / 0.9;
/// Reference depth (metres) for the perspective size change.
const DEPTH_REFERENCE: f64 = 0.5;

impl Placement {
    pub fn new(primitive: &Primitive, pose: &PoseVector, geometry: SensorGeometry) -> Self {
        let [tx, ty, tz] = pose.translation();
        let ppm = geometry.width as f64 * LATERAL_SCALE;
        let depth = (DEPTH_REFERENCE / (DEPTH_REFERENCE + tz)).clamp(0.1, 10.0);
        let radius = primitive.radius_px * depth;
        let alpha = pose.alpha();
        let rotation = Rotation3::new(Vector3::from(pose.rotation()));
        let n = rotation * Vector3::z();
        Placement {
            cx: geometry.width as f64 * 0.5 + tx * ppm,
            cy: geometry.height as f64 * 0.5 - ty * ppm,
            rx: radius * (0.1 * alpha[0]).exp(),
            ry: radius * (0.1 * alpha[1]).exp(),
            inv_rotation: rotation.inverse(),
            disk_normal: [n.x, n.y, n.z],
            texture_scale: primitive.texture.cells_per_radius,
            phase: 0.25 * alpha[2],
        }
    }

    /// Inclusive-exclusive pixel bounds `(x0, y0, x1, y1)` of the outline, clipped.
    fn bounds(&self, geometry: SensorGeometry) -> Option<(u16, u16, u16, u16)> {
        let clip = |v: f64, hi: u16| v.clamp(0.0, hi as f64) as u16;
        let x0 = clip((self.cx - self.rx - 1.0).floor(), geometry.width);
        let x1 = clip((self.cx + self.rx + 1.0).ceil(), geometry.width);
        let y0 = clip((self.cy - self.ry - 1.0).floor(), geometry.height);
        let y1 = clip((self.cy + self.ry + 1.0).ceil(), geometry.height);
        (x0 < x1 && y0 < y1).then_some((x0, y0, x1, y1))
    }

    /// Linear colour of the primitive at a pixel centre, if it covers it.
    #[inline]
    fn colour(&self, primitive: &Primitive, lighting: &LightingConfig, x: u16, y: u16) -> Option<Rgb> {
        let nx = (x as f64 + 0.5 - self.cx) / self.rx;
        // image rows grow downwards, camera y points up
        let ny = -(y as f64 + 0.5 - self.cy) / self.ry;
        let d2 = nx * nx + ny * ny;
        if d2 > 1.0 {
            return None;
        }
        let (surface, normal) = match primitive.shape {
            Shape::Sphere => {
                let nz = (1.0 - d2).sqrt();
                ([nx, ny, nz], [nx, ny, nz])
            }
            Shape::Disk => ([nx, ny, 0.0], self.disk_normal),
        };
        let q = self.inv_rotation * Vector3::from(surface);
        let s = self.texture_scale;
        let cell = floor_i64(q.x * s + self.phase) + floor_i64(q.y * s + self.phase) + floor_i64(q.z * s + self.phase);
        let albedo = if cell & 1 == 0 {
            primitive.texture.albedo_a
        } else {
            primitive.texture.albedo_b
        };
        Some(shade_unchecked(normal, albedo, lighting))
    }
}

/// Renders log-brightness frames, re-shading only the primitive's
/// neighbourhood and restoring the rest from a cached background.
#[derive(Debug, Clone)]
pub struct Renderer {
    geometry: SensorGeometry,
    epsilon: f64,
    background_log: Vec<f64>,
    frame: Vec<f64>,
    dirty: Option<(u16, u16, u16, u16)>,
}

impl Renderer {
    pub fn new(scene: &SceneConfig, geometry: SensorGeometry, epsilon: f64) -> Result<Self> {
        scene.validate(geometry)?;
        let mut r = Renderer {
            geometry,
            epsilon,
            background_log: Vec::new(),
            frame: Vec::new(),
            dirty: None,
        };
        r.load_background(&scene.background);
        Ok(r)
    }

    /// Switches to a new scene's background.
    pub fn reset(&mut self, scene: &SceneConfig) -> Result<()> {
        scene.validate(self.geometry)?;
        self.load_background(&scene.background);
        Ok(())
    }

    fn load_background(&mut self, background: &Background) {
        let g = self.geometry;
        self.background_log.clear();
        for y in 0..g.height {
            for x in 0..g.width {
                let rgb = background.sensor_pixel(x, y);
                self.background_log.push(log_brightness(rgb, self.epsilon));
            }
        }
        self.frame.clone_from(&self.background_log);
        self.dirty = None;
    }

    /// Renders `pose` and returns the row-major log-brightness frame.
    pub fn render(&mut self, scene: &SceneConfig, pose: &PoseVector) -> &[f64] {
        let w = self.geometry.width as usize;
        if let Some((x0, y0, x1, y1)) = self.dirty.take() {
            for y in y0 as usize..y1 as usize {
                let row = y * w;
                self.frame[row + x0 as usize..row + x1 as usize]
                    .copy_from_slice(&self.background_log[row + x0 as usize..row + x1 as usize]);
            }
        }
        let placement = Placement::new(&scene.primitive, pose, self.geometry);
        if let Some((x0, y0, x1, y1)) = placement.bounds(self.geometry) {
            for y in y0..y1 {
                let row = y as usize * w;
                for x in x0..x1 {
                    if let Some(c) = placement.colour(&scene.primitive, &scene.lighting, x, y) {
                        self.frame[row + x as usize] = log_brightness(c.map(|v| v * 255.0), self.epsilon);
                    }
                }
            }
            self.dirty = Some((x0, y0, x1, y1));
        }
        &self.frame
    }

    pub fn frame(&self) -> &[f64] {
        &self.frame
    }
}

/// Full-frame RGB render with channels in `[0, 255]`.
pub fn render_rgb(scene: &SceneConfig, pose: &PoseVector, geometry: SensorGeometry) -> Result<RgbImage> {
    scene.validate(geometry)?;
    let placement = Placement::new(&scene.primitive, pose, geometry);
    let mut pixels = Vec::with_capacity(geometry.pixel_count());
    for y in 0..geometry.height {
        for x in 0..geometry.width {
            let rgb = match placement.colour(&scene.primitive, &scene.lighting, x, y) {
                Some(c) => c.map(|v| v * 255.0),
                None => scene.background.sensor_pixel(x, y),
            };
            pixels.push(rgb);
        }
    }
    Ok(RgbImage {
        width: geometry.width,
        height: geometry.height,
        pixels,
    })
}

/// Uniform ranges for random poses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PoseRanges {
    pub alpha: f64,
    pub translation_xy: f64,
    pub translation_z: f64,
    pub rotation: f64,
}

impl Default for PoseRanges {
    fn default() -> Self {
        PoseRanges {
            alpha: 2.0,
            translation_xy: 0.3,
            translation_z: 0.09,
            rotation: 0.5,
        }
    }
}

impl PoseRanges {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> PoseVector {
        let mut u = |half: f64| {
            if half > 0.0 {
                rng.random_range(-half..=half)
            } else {
                0.0
            }
        };
        let alpha = [(); 6].map(|_| u(self.alpha));
        let translation = [u(self.translation_xy), u(self.translation_xy), u(self.translation_z)];
        let rotation = [(); 3].map(|_| u(self.rotation));
        PoseVector::from_parts(alpha, translation, rotation)
    }
}

/// Distributions for the periodic scene re-randomisation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SceneSampler {
    /// Fixed primitive shape, or random when unset.
    pub shape: Option<Shape>,
    pub poses: PoseRanges,
    pub rerandomize_period: f64,
    /// Mean and variance of the per-segment event threshold.
    pub threshold_mean: f64,
    pub threshold_variance: f64,
    pub light_intensity_min: f64,
    pub light_intensity_max: f64,
}

impl Default for SceneSampler {
    fn default() -> Self {
        SceneSampler {
            shape: None,
            poses: PoseRanges::default(),
            rerandomize_period: DEFAULT_RERANDOMIZE_PERIOD,
            threshold_mean: 0.5,
            threshold_variance: 0.0004,
            light_intensity_min: 0.9,
            light_intensity_max: 1.1,
        }
    }
}

/// Per-light colour scale so two facing lights plus ambient stay near 1.
const LIGHT_SCALE: f64 = 0.45;
const AMBIENT: f64 = 0.1;

fn random_direction<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    loop {
        let v: [f64; 3] = [
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
        ];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 1e-9 {
            return v.map(|c| c / n);
        }
    }
}

impl SceneSampler {
    pub fn validate(&self) -> Result<()> {
        if !(self.rerandomize_period > 0.0) {
            return Err(Error::invalid("rerandomize_period", "must be positive"));
        }
        if !(self.threshold_mean > 0.0 && self.threshold_variance >= 0.0) {
            return Err(Error::invalid("threshold", "mean must be > 0 and variance >= 0"));
        }
        if !(self.light_intensity_min >= 0.0 && self.light_intensity_min <= self.light_intensity_max) {
            return Err(Error::invalid("light_intensity", "need 0 <= min <= max"));
        }
        Ok(())
    }

    /// Draws a fresh scene whose trajectory covers `seconds`.
    pub fn sample_scene<R: Rng + ?Sized>(
        &self,
        geometry: SensorGeometry,
        seconds: usize,
        rng: &mut R,
    ) -> SceneConfig {
        let shape = self.shape.unwrap_or_else(|| {
            if rng.random_bool(0.5) {
                Shape::Sphere
            } else {
                Shape::Disk
            }
        });
        let w = geometry.width as f64;
        let colour = |rng: &mut R, lo: f64, hi: f64| -> Rgb { [(); 3].map(|_| rng.random_range(lo..hi)) };
        let primitive = Primitive {
            shape,
            radius_px: rng.random_range(0.08..0.17) * w,
            texture: Texture {
                albedo_a: colour(rng, 0.4, 1.0),
                albedo_b: colour(rng, 0.0, 0.4),
                cells_per_radius: rng.random_range(1.5..4.0),
            },
        };
        let pad_x = geometry.width / 4;
        let pad_y = geometry.height / 4;
        let mut background =
            Background::procedural(geometry.width + pad_x, geometry.height + pad_y, rng);
        background.crop_x = rng.random_range(0..=pad_x);
        background.crop_y = rng.random_range(0..=pad_y);
        let intensity = Uniform::new_inclusive(self.light_intensity_min, self.light_intensity_max)
            .expect("validated range");
        let i1 = intensity.sample(rng) * LIGHT_SCALE;
        let i2 = intensity.sample(rng) * LIGHT_SCALE;
        let lighting = LightingConfig {
            l1: random_direction(rng),
            l2: random_direction(rng),
            c1: [i1.min(1.0); 3],
            c2: [i2.min(1.0); 3],
            c_ambient: [AMBIENT; 3],
        };
        let trajectory = BezierTrajectory::random(seconds, rng, |r| self.poses.sample(r));
        SceneConfig {
            primitive,
            background,
            trajectory,
            lighting,
            rerandomize_period: self.rerandomize_period,
        }
    }

    /// Per-segment threshold, redrawn until positive.
    pub fn sample_threshold<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let normal =
            Normal::new(self.threshold_mean, self.threshold_variance.sqrt()).expect("validated variance");
        loop {
            let c = normal.sample(rng);
            if c > 0.0 {
                return c;
            }
        }
    }
}
