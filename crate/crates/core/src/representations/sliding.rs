use crate::error::{Error, Result};
use crate::event::{Micros, SensorGeometry};
use crate::representations::builders::normalized_time;
use crate::representations::{RepresentationKind, WindowImage};
use crate::window::EventWindow;

const EMPTY: Micros = Micros::MAX;

/// Incremental LNES builder for windows that slide forward in time.
///
/// Keeps the newest timestamp per `(polarity, pixel)` cell, so each window
/// only ingests events newer than the previous window's end instead of
/// replaying its whole history. Output is identical to
/// [`build_lnes`](super::build_lnes) on the same window.
#[derive(Debug, Clone)]
pub struct LnesAccumulator {
    geometry: SensorGeometry,
    last: Vec<Micros>,
    ingested_end: Micros,
}

impl LnesAccumulator {
    pub fn new(geometry: SensorGeometry) -> Self {
        LnesAccumulator {
            geometry,
            last: vec![EMPTY; 2 * geometry.pixel_count()],
            ingested_end: 0,
        }
    }

    pub fn reset(&mut self) {
        self.last.fill(EMPTY);
        self.ingested_end = 0;
    }

    fn ingest(&mut self, window: &EventWindow<'_>) -> Result<()> {
        let end = window.end();
        if end < self.ingested_end {
            return Err(Error::invalid(
                "window",
                format!("window ending at {end}us precedes already ingested data up to {}us", self.ingested_end),
            ));
        }
        let fresh = &window.events[window.events.partition_point(|e| e.t < self.ingested_end)..];
        let plane = self.geometry.pixel_count();
        let w = self.geometry.width as usize;
        for (i, e) in fresh.iter().enumerate() {
            if !self.geometry.contains(e.x, e.y) {
                return Err(Error::EventOutOfBounds {
                    index: window.events.len() - fresh.len() + i,
                    x: e.x,
                    y: e.y,
                    width: self.geometry.width,
                    height: self.geometry.height,
                });
            }
            self.last[e.polarity.channel() * plane + e.y as usize * w + e.x as usize] = e.t;
        }
        self.ingested_end = end;
        Ok(())
    }

    /// Writes the LNES of `window` into `image`, reusing its allocation.
    pub fn render_into(&mut self, window: &EventWindow<'_>, image: &mut WindowImage) -> Result<()> {
        if window.length == 0 {
            return Err(Error::invalid("window length", "must be at least 1us"));
        }
        self.ingest(window)?;
        image.kind = RepresentationKind::Lnes;
        image.width = self.geometry.width;
        image.height = self.geometry.height;
        image.window_start = window.start;
        image.window_length = window.length;
        image.data.resize(self.last.len(), 0.0);
        let (start, length) = (window.start, window.length);
        for (out, &t) in image.data.iter_mut().zip(&self.last) {
            *out = if t != EMPTY && t >= start {
                normalized_time(t, start, length)
            } else {
                0.0
            };
        }
        Ok(())
    }

    pub fn render(&mut self, window: &EventWindow<'_>) -> Result<WindowImage> {
        let mut image = WindowImage::zeros(RepresentationKind::Lnes, self.geometry, window.start, window.length);
        self.render_into(window, &mut image)?;
        Ok(image)
    }
}
