//! Per-pixel event emission from log-brightness frames.

use rand::Rng;
use rand_distr::{Distribution, Geometric};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::event::{Event, Micros, Polarity, SensorGeometry};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CameraConfig {
    pub geometry: SensorGeometry,
    /// Log-brightness step that triggers one event.
    pub threshold: f64,
    /// Positive noise events per second over the whole sensor.
    pub noise_rate_positive: f64,
    /// Negative noise events per second over the whole sensor.
    pub noise_rate_negative: f64,
    /// Added to the luma before taking the log.
    pub epsilon: f64,
    pub steps_per_second: u32,
}

impl Default for CameraConfig {
    /// DAVIS240C calibration: C = 0.5, about 2500 positive and 100 negative
    /// noise events per second, simulated at 1 kHz.
    fn default() -> Self {
        CameraConfig {
            geometry: SensorGeometry::default(),
            threshold: 0.5,
            noise_rate_positive: 2500.0,
            noise_rate_negative: 100.0,
            epsilon: 1.0,
            steps_per_second: 1000,
        }
    }
}

impl CameraConfig {
    pub fn noiseless(geometry: SensorGeometry, threshold: f64) -> Self {
        CameraConfig {
            geometry,
            threshold,
            noise_rate_positive: 0.0,
            noise_rate_negative: 0.0,
            ..CameraConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry.check()?;
        if !(self.threshold > 0.0 && self.threshold.is_finite()) {
            return Err(Error::invalid("threshold", format!("must be > 0, got {}", self.threshold)));
        }
        for (name, rate) in [
            ("noise_rate_positive", self.noise_rate_positive),
            ("noise_rate_negative", self.noise_rate_negative),
        ] {
            if !(rate >= 0.0 && rate.is_finite()) {
                return Err(Error::invalid(name, format!("must be >= 0, got {rate}")));
            }
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::invalid("epsilon", format!("must be > 0, got {}", self.epsilon)));
        }
        if self.steps_per_second == 0 || 1_000_000 % self.steps_per_second != 0 {
            return Err(Error::invalid(
                "steps_per_second",
                format!(
                    "must be >= 1 and divide 1000000 so steps land on whole microseconds, got {}",
                    self.steps_per_second
                ),
            ));
        }
        Ok(())
    }

    /// Duration of one simulation step.
    pub fn step_micros(&self) -> Micros {
        1_000_000 / self.steps_per_second.max(1) as Micros
    }

    /// Per-pixel, per-step noise probabilities `(positive, negative)`:
    /// the whole-sensor rate spread evenly over pixels and steps.
    pub fn noise_probabilities(&self) -> (f64, f64) {
        let denom = self.geometry.pixel_count() as f64 * self.steps_per_second as f64;
        (
            (self.noise_rate_positive / denom).min(1.0),
            (self.noise_rate_negative / denom).min(1.0),
        )
    }
}

/// Per-pixel log-brightness, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LogBrightnessFrame {
    pub width: u16,
    pub height: u16,
    pub values: Vec<f64>,
    pub timestamp: Micros,
}

impl LogBrightnessFrame {
    pub fn new(geometry: SensorGeometry, values: Vec<f64>, timestamp: Micros) -> Result<Self> {
        if values.len() != geometry.pixel_count() {
            return Err(Error::DimensionMismatch {
                expected: format!("{} values", geometry.pixel_count()),
                actual: format!("{}", values.len()),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid("values", format!("non-finite log-brightness at pixel {i}")));
        }
        Ok(LogBrightnessFrame {
            width: geometry.width,
            height: geometry.height,
            values,
            timestamp,
        })
    }

    pub fn filled(geometry: SensorGeometry, value: f64, timestamp: Micros) -> Self {
        LogBrightnessFrame {
            width: geometry.width,
            height: geometry.height,
            values: vec![value; geometry.pixel_count()],
            timestamp,
        }
    }

    pub fn geometry(&self) -> SensorGeometry {
        SensorGeometry {
            width: self.width,
            height: self.height,
        }
    }
}

/// Log-brightness at each pixel's most recent event.
#[derive(Debug, Clone, PartialEq)]
pub struct MemoryFrame {
    pub width: u16,
    pub height: u16,
    pub values: Vec<f64>,
}

impl MemoryFrame {
    /// Memory initialised to a frame, so a static scene emits nothing.
    pub fn from_frame(frame: &LogBrightnessFrame) -> Self {
        MemoryFrame {
            width: frame.width,
            height: frame.height,
            values: frame.values.clone(),
        }
    }

    pub fn filled(geometry: SensorGeometry, value: f64) -> Self {
        MemoryFrame {
            width: geometry.width,
            height: geometry.height,
            values: vec![value; geometry.pixel_count()],
        }
    }

    pub fn geometry(&self) -> SensorGeometry {
        SensorGeometry {
            width: self.width,
            height: self.height,
        }
    }

    /// `max |L(u) - M(u)|` over all pixels.
    pub fn max_residual(&self, frame: &LogBrightnessFrame) -> f64 {
        self.values
            .iter()
            .zip(&frame.values)
            .map(|(m, l)| (l - m).abs())
            .fold(0.0, f64::max)
    }
}

/// Noise pixels drawn for one step, as sorted row-major pixel indices.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NoiseDraw {
    pub positive: Vec<u32>,
    pub negative: Vec<u32>,
}

impl NoiseDraw {
    pub fn is_empty(&self) -> bool {
        self.positive.is_empty() && self.negative.is_empty()
    }
}

/// Independent Bernoulli trial per pixel, drawn by geometric skipping so the
/// cost scales with the number of hits rather than the pixel count.
fn bernoulli_hits<R: Rng + ?Sized>(pixels: usize, p: f64, rng: &mut R, out: &mut Vec<u32>) {
    out.clear();
    if p <= 0.0 || pixels == 0 {
        return;
    }
    if p >= 1.0 {
        out.extend(0..pixels as u32);
        return;
    }
    let gap = Geometric::new(p).expect("probability in (0, 1)");
    let mut idx: u64 = 0;
    loop {
        idx = idx.saturating_add(gap.sample(rng));
        if idx >= pixels as u64 {
            break;
        }
        out.push(idx as u32);
        idx += 1;
    }
}

/// Draws this step's noise pixels: positive first, then negative.
pub fn sample_noise<R: Rng + ?Sized>(config: &CameraConfig, rng: &mut R, draw: &mut NoiseDraw) {
    let (pp, pn) = config.noise_probabilities();
    let pixels = config.geometry.pixel_count();
    bernoulli_hits(pixels, pp, rng, &mut draw.positive);
    bernoulli_hits(pixels, pn, rng, &mut draw.negative);
}

fn check_dims(memory: &MemoryFrame, frame: &LogBrightnessFrame, config: &CameraConfig) -> Result<()> {
    let g = config.geometry;
    for (what, w, h, len) in [
        ("memory frame", memory.width, memory.height, memory.values.len()),
        ("log-brightness frame", frame.width, frame.height, frame.values.len()),
    ] {
        if (w, h) != (g.width, g.height) || len != g.pixel_count() {
            return Err(Error::DimensionMismatch {
                expected: format!("{}x{} sensor", g.width, g.height),
                actual: format!("{what} of {w}x{h} with {len} values"),
            });
        }
    }
    Ok(())
}

/// True when no pixel of the row crosses the threshold. Written without
/// early exit so it vectorises.
#[inline]
fn row_is_quiet(memory: &[f64], lum: &[f64], c: f64) -> bool {
    let mut crossing = false;
    for (m, l) in memory.iter().zip(lum) {
        crossing |= (l - m).abs() >= c;
    }
    !crossing
}

/// One simulation step with an already drawn noise set.
///
/// Pixels are visited in row-major order. At each pixel, noise events come
/// first (positive, then negative), followed by threshold events: with
/// `delta = L(u) - M(u)`, `floor(delta / C)` positive events when
/// `delta >= C`, or `floor(-delta / C)` negative events when `delta <= -C`,
/// moving `M(u)` by the same number of thresholds. Noise does not touch the
/// memory frame. Every event carries the frame timestamp. Events are
/// appended to `out`; the number appended is returned.
pub fn step_with_noise(
    memory: &mut MemoryFrame,
    frame: &LogBrightnessFrame,
    config: &CameraConfig,
    noise: &NoiseDraw,
    out: &mut Vec<Event>,
) -> Result<usize> {
    check_dims(memory, frame, config)?;
    let before = out.len();
    let c = config.threshold;
    let width = config.geometry.width as usize;
    let t = frame.timestamp;
    let (mut pi, mut ni) = (0usize, 0usize);

    for (row, (mem_row, lum_row)) in memory
        .values
        .chunks_exact_mut(width)
        .zip(frame.values.chunks_exact(width))
        .enumerate()
    {
        let y = row as u16;
        let row_base = (row * width) as u32;
        let row_end = row_base + width as u32;
        let noisy_row = noise.positive.get(pi).is_some_and(|&i| i < row_end)
            || noise.negative.get(ni).is_some_and(|&i| i < row_end);
        if !noisy_row && row_is_quiet(mem_row, lum_row, c) {
            continue;
        }

        for (col, (m, &l)) in mem_row.iter_mut().zip(lum_row).enumerate() {
            let x = col as u16;
            if noisy_row {
                let idx = row_base + col as u32;
                if noise.positive.get(pi) == Some(&idx) {
                    out.push(Event::new(x, y, t, Polarity::Positive));
                    pi += 1;
                }
                if noise.negative.get(ni) == Some(&idx) {
                    out.push(Event::new(x, y, t, Polarity::Negative));
                    ni += 1;
                }
            }
            let delta = l - *m;
            if delta >= c {
                let n = (delta / c).floor();
                let ev = Event::new(x, y, t, Polarity::Positive);
                out.extend(std::iter::repeat_n(ev, n as usize));
                *m += n * c;
            } else if delta <= -c {
                let n = (-delta / c).floor();
                let ev = Event::new(x, y, t, Polarity::Negative);
                out.extend(std::iter::repeat_n(ev, n as usize));
                *m -= n * c;
            }
        }
    }
    Ok(out.len() - before)
}

/// Reusable per-run state for [`step`]: the noise draw buffer.
#[derive(Debug, Default)]
pub struct StepScratch {
    noise: NoiseDraw,
}

/// Draws noise from `rng` and runs one emission step.
pub fn step<R: Rng + ?Sized>(
    memory: &mut MemoryFrame,
    frame: &LogBrightnessFrame,
    config: &CameraConfig,
    rng: &mut R,
    scratch: &mut StepScratch,
    out: &mut Vec<Event>,
) -> Result<usize> {
    check_dims(memory, frame, config)?;
    sample_noise(config, rng, &mut scratch.noise);
    step_with_noise(memory, frame, config, &scratch.noise, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn one_pixel(l: f64, m: f64, c: f64) -> (Vec<Event>, f64) {
        let g = SensorGeometry::new(1, 1).unwrap();
        let config = CameraConfig::noiseless(g, c);
        let frame = LogBrightnessFrame::filled(g, l, 42);
        let mut memory = MemoryFrame::filled(g, m);
        let mut out = Vec::new();
        step_with_noise(&mut memory, &frame, &config, &NoiseDraw::default(), &mut out).unwrap();
        (out, memory.values[0])
    }

    #[test]
    fn positive_burst() {
        let (events, m) = one_pixel(1.2, 0.0, 0.5);
        assert_eq!(events.len(), 2);
        assert!(events.iter().all(|e| e.polarity == Polarity::Positive && e.t == 42));
        assert_eq!(m, 1.0);
    }

    #[test]
    fn negative_burst() {
        let (events, m) = one_pixel(0.9, 2.0, 0.5);
        assert_eq!(events.len(), 2);
        assert!(events.iter().all(|e| e.polarity == Polarity::Negative));
        assert_eq!(m, 1.0);
    }

    #[test]
    fn equality_emits() {
        let (events, m) = one_pixel(0.5, 0.0, 0.5);
        assert_eq!(events.len(), 1);
        assert_eq!(m, 0.5);
        let (events, _) = one_pixel(0.49, 0.0, 0.5);
        assert!(events.is_empty());
    }

    #[test]
    fn static_scene_without_noise_is_silent() {
        let g = SensorGeometry::new(16, 8).unwrap();
        let config = CameraConfig::noiseless(g, 0.3);
        let frame = LogBrightnessFrame::filled(g, 2.5, 0);
        let mut memory = MemoryFrame::from_frame(&frame);
        let before = memory.clone();
        let mut out = Vec::new();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = step(&mut memory, &frame, &config, &mut rng, &mut StepScratch::default(), &mut out)
            .unwrap();
        assert_eq!(n, 0);
        assert_eq!(memory, before);
    }

    #[test]
    fn noise_does_not_move_memory() {
        let g = SensorGeometry::new(4, 2).unwrap();
        let config = CameraConfig::noiseless(g, 0.5);
        let frame = LogBrightnessFrame::filled(g, 0.0, 7);
        let mut memory = MemoryFrame::from_frame(&frame);
        let noise = NoiseDraw {
            positive: vec![0, 5],
            negative: vec![5],
        };
        let mut out = Vec::new();
        step_with_noise(&mut memory, &frame, &config, &noise, &mut out).unwrap();
        let got: Vec<_> = out.iter().map(|e| (e.x, e.y, e.polarity)).collect();
        assert_eq!(
            got,
            vec![
                (0, 0, Polarity::Positive),
                (1, 1, Polarity::Positive),
                (1, 1, Polarity::Negative)
            ]
        );
        assert!(memory.values.iter().all(|&m| m == 0.0));
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let g = SensorGeometry::new(4, 4).unwrap();
        let config = CameraConfig::noiseless(g, 0.5);
        let frame = LogBrightnessFrame::filled(SensorGeometry::new(3, 4).unwrap(), 0.0, 0);
        let mut memory = MemoryFrame::filled(g, 0.0);
        let err = step_with_noise(&mut memory, &frame, &config, &NoiseDraw::default(), &mut Vec::new());
        assert!(matches!(err, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn default_noise_probability() {
        let (pp, pn) = CameraConfig::default().noise_probabilities();
        assert!((pp - 2500.0 / (240.0 * 180.0 * 1000.0)).abs() < 1e-18);
        assert!((pp - 5.787e-5).abs() < 1e-8);
        assert!(pn < pp);
    }

    #[test]
    fn noise_hit_rate_matches_probability() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut hits = Vec::new();
        let mut total = 0usize;
        for _ in 0..200 {
            bernoulli_hits(10_000, 0.01, &mut rng, &mut hits);
            assert!(hits.windows(2).all(|w| w[0] < w[1]));
            total += hits.len();
        }
        // 2e4 expected, sd ~ 141
        assert!((total as f64 - 20_000.0).abs() < 5.0 * 141.0, "{total}");
    }

    #[test]
    fn config_validation() {
        assert!(CameraConfig::default().validate().is_ok());
        let d = CameraConfig::default;
        assert!(CameraConfig { threshold: 0.0, ..d() }.validate().is_err());
        assert!(CameraConfig { steps_per_second: 7, ..d() }.validate().is_err());
        assert!(CameraConfig { noise_rate_negative: -1.0, ..d() }.validate().is_err());
    }
}
