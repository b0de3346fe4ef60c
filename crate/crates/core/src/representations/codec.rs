//! Flat little-endian float32 image records.
//!
//! ```text
//! offset  size  field
//!      0     4  magic "EVRW"
//!      4     1  kind tag (0 LNES, 1 EOI, 2 ECI-S, 3 ECI)
//!      5     2  channels c   (u16 LE)
//!      7     2  width W      (u16 LE)
//!      9     2  height H     (u16 LE)
//!     11     5  reserved, zero
//!     16  4cHW  f32 LE values, (channel, row, column) order
//! ```
//!
//! A file is a concatenation of such records.

use crate::error::{Error, Result};
use crate::representations::{RepresentationKind, WindowImage};

pub const MAGIC: [u8; 4] = *b"EVRW";
pub const HEADER_LEN: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ImageHeader {
    pub kind: RepresentationKind,
    pub channels: u16,
    pub width: u16,
    pub height: u16,
}

impl ImageHeader {
    pub fn payload_len(&self) -> usize {
        4 * self.channels as usize * self.width as usize * self.height as usize
    }

    pub fn to_bytes(&self) -> [u8; HEADER_LEN] {
        let mut h = [0u8; HEADER_LEN];
        h[..4].copy_from_slice(&MAGIC);
        h[4] = self.kind.tag();
        h[5..7].copy_from_slice(&self.channels.to_le_bytes());
        h[7..9].copy_from_slice(&self.width.to_le_bytes());
        h[9..11].copy_from_slice(&self.height.to_le_bytes());
        h
    }

    /// Parses a header found at `offset` in a larger buffer.
    pub fn parse(bytes: &[u8], offset: usize) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::decode(offset, format!("truncated header: {} of {HEADER_LEN} bytes", bytes.len())));
        }
        if bytes[..4] != MAGIC {
            return Err(Error::decode(offset, format!("bad magic {:02x?}", &bytes[..4])));
        }
        let kind = RepresentationKind::from_tag(bytes[4])
            .ok_or_else(|| Error::decode(offset + 4, format!("unknown kind tag {}", bytes[4])))?;
        let u16_at = |i: usize| u16::from_le_bytes([bytes[i], bytes[i + 1]]);
        let header = ImageHeader {
            kind,
            channels: u16_at(5),
            width: u16_at(7),
            height: u16_at(9),
        };
        if header.channels as usize != kind.channels() {
            return Err(Error::decode(
                offset + 5,
                format!("{} images have {} channel(s), header says {}", kind.name(), kind.channels(), header.channels),
            ));
        }
        if header.width == 0 || header.height == 0 {
            return Err(Error::decode(offset + 7, "zero image dimension"));
        }
        if let Some(i) = bytes[11..HEADER_LEN].iter().position(|&b| b != 0) {
            return Err(Error::decode(offset + 11 + i, "reserved header byte is not zero"));
        }
        Ok(header)
    }
}

/// Appends one image record to `out`.
pub fn encode_image(image: &WindowImage, out: &mut Vec<u8>) {
    let header = ImageHeader {
        kind: image.kind,
        channels: image.channels() as u16,
        width: image.width,
        height: image.height,
    };
    out.reserve(HEADER_LEN + header.payload_len());
    out.extend_from_slice(&header.to_bytes());
    for v in &image.data {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

/// Parses a concatenation of image records. Window timing is not stored and
/// comes back as zero.
pub fn decode_images(bytes: &[u8]) -> Result<Vec<WindowImage>> {
    let mut images = Vec::new();
    let mut offset = 0;
    while offset < bytes.len() {
        let header = ImageHeader::parse(&bytes[offset..], offset)?;
        let body = offset + HEADER_LEN;
        let len = header.payload_len();
        let payload = bytes
            .get(body..body + len)
            .ok_or_else(|| Error::decode(body, format!("truncated payload: need {len} bytes, {} left", bytes.len() - body)))?;
        let data = payload
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        images.push(WindowImage {
            kind: header.kind,
            width: header.width,
            height: header.height,
            window_start: 0,
            window_length: 0,
            data,
        });
        offset = body + len;
    }
    Ok(images)
}
