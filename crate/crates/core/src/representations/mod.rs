//! Window images for learning: locally-normalised event surfaces (LNES) and
//! the occurrence/count baselines.
//!
//! Images are stored channel-major, `(channel, row, column)`, row-major
//! within a channel. Channel 0 holds positive events, channel 1 negative.

mod builders;
mod codec;
mod sliding;

pub use builders::{build, build_eci, build_eci_s, build_eoi, build_lnes, rescale_window_length, swap_polarity};
pub use codec::{decode_images, encode_image, ImageHeader, HEADER_LEN, MAGIC};
pub use sliding::LnesAccumulator;

use serde::{Deserialize, Serialize};

use crate::event::{Micros, SensorGeometry};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RepresentationKind {
    Lnes,
    Eoi,
    EciS,
    Eci,
}

impl RepresentationKind {
    pub const ALL: [RepresentationKind; 4] = [
        RepresentationKind::Lnes,
        RepresentationKind::Eoi,
        RepresentationKind::EciS,
        RepresentationKind::Eci,
    ];

    pub const fn channels(self) -> usize {
        match self {
            RepresentationKind::EciS => 1,
            _ => 2,
        }
    }

    /// Byte tag used in the serialized image header.
    pub const fn tag(self) -> u8 {
        match self {
            RepresentationKind::Lnes => 0,
            RepresentationKind::Eoi => 1,
            RepresentationKind::EciS => 2,
            RepresentationKind::Eci => 3,
        }
    }

    pub const fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(RepresentationKind::Lnes),
            1 => Some(RepresentationKind::Eoi),
            2 => Some(RepresentationKind::EciS),
            3 => Some(RepresentationKind::Eci),
            _ => None,
        }
    }

    pub const fn name(self) -> &'static str {
        match self {
            RepresentationKind::Lnes => "lnes",
            RepresentationKind::Eoi => "eoi",
            RepresentationKind::EciS => "eci-s",
            RepresentationKind::Eci => "eci",
        }
    }
}

impl std::str::FromStr for RepresentationKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RepresentationKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown representation `{s}` (expected lnes, eoi, eci or eci-s)"))
    }
}

/// A `c x H x W` float image built from one event window.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowImage {
    pub kind: RepresentationKind,
    pub width: u16,
    pub height: u16,
    pub window_start: Micros,
    pub window_length: Micros,
    pub data: Vec<f32>,
}

impl WindowImage {
    pub fn zeros(kind: RepresentationKind, geometry: SensorGeometry, window_start: Micros, window_length: Micros) -> Self {
        WindowImage {
            kind,
            width: geometry.width,
            height: geometry.height,
            window_start,
            window_length,
            data: vec![0.0; kind.channels() * geometry.pixel_count()],
        }
    }

    pub fn channels(&self) -> usize {
        self.kind.channels()
    }

    pub fn geometry(&self) -> SensorGeometry {
        SensorGeometry {
            width: self.width,
            height: self.height,
        }
    }

    pub fn plane_len(&self) -> usize {
        self.width as usize * self.height as usize
    }

    #[inline]
    pub fn offset(&self, channel: usize, x: u16, y: u16) -> usize {
        channel * self.plane_len() + y as usize * self.width as usize + x as usize
    }

    #[inline]
    pub fn get(&self, channel: usize, x: u16, y: u16) -> f32 {
        self.data[self.offset(channel, x, y)]
    }

    pub fn channel(&self, channel: usize) -> &[f32] {
        let n = self.plane_len();
        &self.data[channel * n..(channel + 1) * n]
    }

    /// Sum of every value across channels.
    pub fn total(&self) -> f64 {
        self.data.iter().map(|&v| v as f64).sum()
    }
}
