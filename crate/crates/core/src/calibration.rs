//! Estimating the contrast threshold and the noise rates of a camera.
//!
//! The threshold estimate divides the total absolute log-intensity change
//! seen by a frame camera by the number of events recorded over the same
//! span. It assumes each pixel's brightness moves monotonically between
//! frames, so that no change cancels out before an event fires; recordings
//! should sweep a pattern across the sensor in one direction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::event::{Event, Micros, Polarity, SensorGeometry};

/// Intensities below this are clamped before taking the log.
pub const DEFAULT_EPSILON: f64 = 10.0;

/// A linear-intensity image (for example 8-bit grey levels) with its capture
/// time.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityFrame {
    pub width: u16,
    pub height: u16,
    pub timestamp: Micros,
    pub values: Vec<f64>,
}

impl IntensityFrame {
    pub fn new(geometry: SensorGeometry, timestamp: Micros, values: Vec<f64>) -> Result<Self> {
        if values.len() != geometry.pixel_count() {
            return Err(Error::DimensionMismatch {
                expected: format!("{} values for {}x{}", geometry.pixel_count(), geometry.width, geometry.height),
                actual: format!("{}", values.len()),
            });
        }
        Ok(IntensityFrame {
            width: geometry.width,
            height: geometry.height,
            timestamp,
            values,
        })
    }

    pub fn from_luma8(geometry: SensorGeometry, timestamp: Micros, pixels: &[u8]) -> Result<Self> {
        Self::new(geometry, timestamp, pixels.iter().map(|&p| p as f64).collect())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CalibrationInput<'a> {
    /// At least two frames in increasing time order.
    pub frames: &'a [IntensityFrame],
    /// Sorted events; only those after the first frame and up to the last
    /// frame are counted.
    pub events: &'a [Event],
    pub epsilon: f64,
}

impl<'a> CalibrationInput<'a> {
    pub fn new(frames: &'a [IntensityFrame], events: &'a [Event]) -> Self {
        CalibrationInput {
            frames,
            events,
            epsilon: DEFAULT_EPSILON,
        }
    }

    pub fn with_epsilon(self, epsilon: f64) -> Self {
        CalibrationInput { epsilon, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseRates {
    /// Positive events per second.
    pub positive: f64,
    /// Negative events per second.
    pub negative: f64,
}

impl NoiseRates {
    pub fn total(&self) -> f64 {
        self.positive + self.negative
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdEstimate {
    /// Summed absolute log-intensity change.
    pub delta_total: f64,
    /// Events counted over the frame span.
    pub events: usize,
    /// `delta_total / events`.
    pub threshold: f64,
    /// Events expected from noise over the span, if rates were supplied.
    pub expected_noise: Option<f64>,
    /// `delta_total / (events - expected_noise)`; `None` without rates or
    /// when noise would explain every event.
    pub noise_corrected: Option<f64>,
}

/// Sum over consecutive frame pairs and pixels of
/// `|ln max(Ω₊, ε) − ln max(Ω, ε)|`.
pub fn log_change_total(frames: &[IntensityFrame], epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0) {
        return Err(Error::invalid("epsilon", format!("{epsilon} is not > 0")));
    }
    if frames.len() < 2 {
        return Err(Error::invalid("frames", format!("need at least 2 frames, got {}", frames.len())));
    }
    let first = &frames[0];
    for (i, f) in frames.iter().enumerate() {
        if (f.width, f.height) != (first.width, first.height) || f.values.len() != first.values.len() {
            return Err(Error::DimensionMismatch {
                expected: format!("{}x{} frames", first.width, first.height),
                actual: format!("frame {i} is {}x{}", f.width, f.height),
            });
        }
        if i > 0 && f.timestamp <= frames[i - 1].timestamp {
            return Err(Error::invalid("frames", format!("frame {i} is not later than frame {}", i - 1)));
        }
    }
    let log = |v: f64| v.max(epsilon).ln();
    let mut total = 0.0;
    let mut prev: Vec<f64> = first.values.iter().map(|&v| log(v)).collect();
    let mut cur = vec![0.0; prev.len()];
    for f in &frames[1..] {
        for (c, &v) in cur.iter_mut().zip(&f.values) {
            *c = log(v);
        }
        total += cur.iter().zip(&prev).map(|(a, b)| (a - b).abs()).sum::<f64>();
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(total)
}

/// Events with `first < t <= last`.
fn events_in_span(events: &[Event], first: Micros, last: Micros) -> usize {
    let lo = events.partition_point(|e| e.t <= first);
    let hi = events.partition_point(|e| e.t <= last);
    hi.saturating_sub(lo)
}

/// Threshold estimate from paired frames and events. With `noise` the
/// estimate is also reported after subtracting the expected noise count.
pub fn estimate_threshold(input: &CalibrationInput<'_>, noise: Option<NoiseRates>) -> Result<ThresholdEstimate> {
    crate::event::ensure_sorted(input.events)?;
    let delta_total = log_change_total(input.frames, input.epsilon)?;
    let first = input.frames[0].timestamp;
    let last = input.frames[input.frames.len() - 1].timestamp;
    let events = events_in_span(input.events, first, last);
    if events == 0 {
        return Err(Error::invalid("events", "no events between the first and last frame"));
    }
    let span_seconds = (last - first) as f64 * 1e-6;
    let expected_noise = noise.map(|n| n.total() * span_seconds);
    let noise_corrected = expected_noise.and_then(|e| {
        let signal = events as f64 - e;
        (signal > 0.0).then(|| delta_total / signal)
    });
    Ok(ThresholdEstimate {
        delta_total,
        events,
        threshold: delta_total / events as f64,
        expected_noise,
        noise_corrected,
    })
}

/// Per-polarity event rates of a recording of a static scene.
pub fn estimate_noise_rates(events: &[Event], duration_seconds: f64) -> Result<NoiseRates> {
    if !(duration_seconds > 0.0 && duration_seconds.is_finite()) {
        return Err(Error::invalid("duration", format!("{duration_seconds} is not a finite value > 0")));
    }
    let positive = events.iter().filter(|e| e.polarity == Polarity::Positive).count();
    let negative = events.len() - positive;
    Ok(NoiseRates {
        positive: positive as f64 / duration_seconds,
        negative: negative as f64 / duration_seconds,
    })
}

/// One line of a frame manifest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub timestamp: Micros,
    pub file: String,
}

/// Parses `<microseconds> <file name>` lines. Blank lines and lines starting
/// with `#` are skipped; timestamps must increase strictly.
pub fn parse_frame_manifest(text: &str) -> Result<Vec<ManifestEntry>> {
    let mut entries: Vec<ManifestEntry> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parse_err = |reason: String| Error::Parse { line: line_no, reason };
        let (ts, file) = line
            .split_once(char::is_whitespace)
            .ok_or_else(|| parse_err("expected `<microseconds> <file name>`".into()))?;
        let timestamp: Micros = ts
            .parse()
            .map_err(|e| parse_err(format!("bad timestamp `{ts}`: {e}")))?;
        let file = file.trim();
        if let Some(prev) = entries.last() {
            if timestamp <= prev.timestamp {
                return Err(parse_err(format!("timestamp {timestamp} does not follow {}", prev.timestamp)));
            }
        }
        entries.push(ManifestEntry {
            timestamp,
            file: file.to_string(),
        });
    }
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geometry() -> SensorGeometry {
        SensorGeometry::new(2, 1).unwrap()
    }

    fn frame(t: Micros, a: f64, b: f64) -> IntensityFrame {
        IntensityFrame::new(geometry(), t, vec![a, b]).unwrap()
    }

    #[test]
    fn log_change_sums_per_pixel() {
        let frames = [frame(0, 20.0, 40.0), frame(1, 40.0, 20.0)];
        let total = log_change_total(&frames, 10.0).unwrap();
        assert!((total - 2.0 * 2f64.ln()).abs() < 1e-12);
        // clamping at epsilon
        let dark = [frame(0, 0.0, 1.0), frame(1, 5.0, 10.0)];
        assert_eq!(log_change_total(&dark, 10.0).unwrap(), 0.0);
    }

    #[test]
    fn identical_frames_contribute_nothing() {
        let frames = [frame(0, 30.0, 90.0), frame(1, 30.0, 90.0)];
        assert_eq!(log_change_total(&frames, 10.0).unwrap(), 0.0);
    }

    #[test]
    fn threshold_is_change_per_event() {
        let frames = [frame(0, 10.0, 10.0), frame(1000, 10.0 * 1f64.exp(), 10.0)];
        let events: Vec<_> = (0..2).map(|_| Event::new(0, 0, 1000, Polarity::Positive)).collect();
        let est = estimate_threshold(&CalibrationInput::new(&frames, &events), None).unwrap();
        assert_eq!(est.events, 2);
        assert!((est.threshold - 0.5).abs() < 1e-12);
        assert_eq!(est.noise_corrected, None);
    }

    #[test]
    fn events_outside_the_span_are_ignored() {
        let frames = [frame(1000, 10.0, 10.0), frame(2000, 20.0, 10.0)];
        let events = [
            Event::new(0, 0, 1000, Polarity::Positive),
            Event::new(0, 0, 1500, Polarity::Positive),
            Event::new(0, 0, 2001, Polarity::Positive),
        ];
        let est = estimate_threshold(&CalibrationInput::new(&frames, &events), None).unwrap();
        assert_eq!(est.events, 1);
    }

    #[test]
    fn noise_correction() {
        let frames = [frame(0, 10.0, 10.0), frame(1_000_000, 10.0 * 4f64.exp(), 10.0)];
        let events: Vec<_> = (0..10).map(|i| Event::new(0, 0, 1 + i, Polarity::Positive)).collect();
        let rates = NoiseRates {
            positive: 1.5,
            negative: 0.5,
        };
        let est = estimate_threshold(&CalibrationInput::new(&frames, &events), Some(rates)).unwrap();
        assert!((est.threshold - 0.4).abs() < 1e-12);
        assert!((est.expected_noise.unwrap() - 2.0).abs() < 1e-12);
        assert!((est.noise_corrected.unwrap() - 0.5).abs() < 1e-12);
        let loud = NoiseRates {
            positive: 100.0,
            negative: 0.0,
        };
        let est = estimate_threshold(&CalibrationInput::new(&frames, &events), Some(loud)).unwrap();
        assert_eq!(est.noise_corrected, None);
    }

    #[test]
    fn scale_consistency() {
        let frames = [frame(0, 10.0, 50.0), frame(10, 30.0, 20.0)];
        let events: Vec<_> = (0..4).map(|_| Event::new(0, 0, 10, Polarity::Positive)).collect();
        let once = estimate_threshold(&CalibrationInput::new(&frames, &events), None).unwrap();
        let doubled_frames = [
            frame(0, 10.0, 50.0),
            frame(10, 30.0, 20.0),
            frame(20, 10.0, 50.0),
        ];
        let doubled_events: Vec<_> = (0..8).map(|i| Event::new(0, 0, if i < 4 { 10 } else { 20 }, Polarity::Positive)).collect();
        let twice = estimate_threshold(&CalibrationInput::new(&doubled_frames, &doubled_events), None).unwrap();
        assert!((once.threshold - twice.threshold).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        let frames = [frame(0, 10.0, 10.0), frame(1, 20.0, 10.0)];
        assert!(estimate_threshold(&CalibrationInput::new(&frames, &[]), None).is_err());
        assert!(log_change_total(&frames[..1], 10.0).is_err());
        let other = IntensityFrame::new(SensorGeometry::new(1, 2).unwrap(), 2, vec![1.0, 2.0]).unwrap();
        assert!(matches!(
            log_change_total(&[frames[0].clone(), other], 10.0),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(IntensityFrame::new(geometry(), 0, vec![1.0]).is_err());
        assert!(log_change_total(&[frames[1].clone(), frames[0].clone()], 10.0).is_err());
    }

    #[test]
    fn noise_rates() {
        assert_eq!(
            estimate_noise_rates(&[], 10.0).unwrap(),
            NoiseRates {
                positive: 0.0,
                negative: 0.0
            }
        );
        let events = [
            Event::new(0, 0, 0, Polarity::Positive),
            Event::new(0, 0, 1, Polarity::Positive),
            Event::new(0, 0, 2, Polarity::Negative),
        ];
        let r = estimate_noise_rates(&events, 2.0).unwrap();
        assert_eq!((r.positive, r.negative), (1.0, 0.5));
        assert!(estimate_noise_rates(&events, 0.0).is_err());
    }

    #[test]
    fn manifest_parsing() {
        let text = "# frames\n0 a.pgm\n\n1000   frame 2.pgm\n";
        let m = parse_frame_manifest(text).unwrap();
        assert_eq!(
            m,
            vec![
                ManifestEntry {
                    timestamp: 0,
                    file: "a.pgm".into()
                },
                ManifestEntry {
                    timestamp: 1000,
                    file: "frame 2.pgm".into()
                },
            ]
        );
        assert!(matches!(parse_frame_manifest("x a.pgm"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_frame_manifest("5 a\n5 b"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_frame_manifest("\n12"), Err(Error::Parse { line: 2, .. })));
    }
}
