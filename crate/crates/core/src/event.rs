//! Sensor events and geometry.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Timestamps and durations are integer microseconds from stream start.
pub type Micros = u64;

/// Direction of the log-brightness change that triggered an event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Polarity {
    Positive,
    Negative,
}

impl Polarity {
    /// Image channel holding events of this polarity.
    #[inline]
    pub const fn channel(self) -> usize {
        match self {
            Polarity::Positive => 0,
            Polarity::Negative => 1,
        }
    }

    /// Signed form, `+1` or `-1`.
    #[inline]
    pub const fn sign(self) -> i8 {
        match self {
            Polarity::Positive => 1,
            Polarity::Negative => -1,
        }
    }

    #[inline]
    pub const fn flipped(self) -> Self {
        match self {
            Polarity::Positive => Polarity::Negative,
            Polarity::Negative => Polarity::Positive,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Event {
    /// Pixel column, 0-based.
    pub x: u16,
    /// Pixel row, 0-based.
    pub y: u16,
    pub t: Micros,
    pub polarity: Polarity,
}

impl Event {
    #[inline]
    pub const fn new(x: u16, y: u16, t: Micros, polarity: Polarity) -> Self {
        Event { x, y, t, polarity }
    }
}

/// Sensor resolution in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SensorGeometry {
    pub width: u16,
    pub height: u16,
}

impl Default for SensorGeometry {
    /// The DAVIS240C resolution.
    fn default() -> Self {
        SensorGeometry {
            width: 240,
            height: 180,
        }
    }
}

impl SensorGeometry {
    pub fn new(width: u16, height: u16) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid(
                "geometry",
                format!("sensor must be at least 1x1, got {width}x{height}"),
            ));
        }
        Ok(SensorGeometry { width, height })
    }

    #[inline]
    pub const fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    #[inline]
    pub const fn contains(&self, x: u16, y: u16) -> bool {
        x < self.width && y < self.height
    }

    /// Row-major linear index of a pixel.
    #[inline]
    pub const fn index(&self, x: u16, y: u16) -> usize {
        y as usize * self.width as usize + x as usize
    }

    pub(crate) fn check(&self) -> Result<()> {
        Self::new(self.width, self.height).map(|_| ())
    }
}

/// First offending event of one violation class, plus how many there were.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ViolationSummary {
    pub count: usize,
    pub first_index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OutOfBounds {
    pub summary: ViolationSummary,
    pub x: u16,
    pub y: u16,
    pub width: u16,
    pub height: u16,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Regression {
    pub summary: ViolationSummary,
    pub t: Micros,
    pub previous: Micros,
}

/// Result of [`validate_stream`]. Empty iff the stream is valid.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StreamReport {
    pub out_of_bounds: Option<OutOfBounds>,
    pub regressions: Option<Regression>,
}

impl StreamReport {
    pub fn is_empty(&self) -> bool {
        self.out_of_bounds.is_none() && self.regressions.is_none()
    }
}

impl std::fmt::Display for StreamReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_empty() {
            return write!(f, "stream ok");
        }
        if let Some(o) = &self.out_of_bounds {
            writeln!(
                f,
                "{} out-of-bounds event(s); first at index {}: ({}, {}) on {}x{} sensor",
                o.summary.count, o.summary.first_index, o.x, o.y, o.width, o.height
            )?;
        }
        if let Some(r) = &self.regressions {
            writeln!(
                f,
                "{} timestamp regression(s); first at index {}: t={}us after t={}us",
                r.summary.count, r.summary.first_index, r.t, r.previous
            )?;
        }
        Ok(())
    }
}

/// Checks pixel bounds and timestamp monotonicity of a stream.
pub fn validate_stream(stream: &[Event], geometry: SensorGeometry) -> StreamReport {
    let mut report = StreamReport::default();
    let mut previous: Option<Micros> = None;
    for (index, e) in stream.iter().enumerate() {
        if !geometry.contains(e.x, e.y) {
            match &mut report.out_of_bounds {
                Some(o) => o.summary.count += 1,
                None => {
                    report.out_of_bounds = Some(OutOfBounds {
                        summary: ViolationSummary {
                            count: 1,
                            first_index: index,
                        },
                        x: e.x,
                        y: e.y,
                        width: geometry.width,
                        height: geometry.height,
                    })
                }
            }
        }
        if let Some(prev) = previous {
            if e.t < prev {
                match &mut report.regressions {
                    Some(r) => r.summary.count += 1,
                    None => {
                        report.regressions = Some(Regression {
                            summary: ViolationSummary {
                                count: 1,
                                first_index: index,
                            },
                            t: e.t,
                            previous: prev,
                        })
                    }
                }
            }
        }
        previous = Some(e.t);
    }
    report
}

/// Returns the first out-of-order index as an error.
pub(crate) fn ensure_sorted(stream: &[Event]) -> Result<()> {
    for (index, pair) in stream.windows(2).enumerate() {
        if pair[1].t < pair[0].t {
            return Err(Error::UnsortedStream {
                index: index + 1,
                t: pair[1].t,
                previous: pair[0].t,
            });
        }
    }
    Ok(())
}
