//! Metadata stream file.
//!
//! ```text
//! u32 LE        N, fields per frame
//! repeated:     N x f64 LE, then a u16 LE magic   (8N + 2 bytes)
//! ```
//!
//! The encoder writes magic `0x4D45` ("EM" on disk). The decoder accepts any
//! magic as long as every frame carries the same one.

use crate::error::{Error, Result};
use crate::pose::{PoseVector, POSE_DIM};

pub const MAGIC: u16 = 0x4D45;
pub const HEADER_LEN: usize = 4;

/// Size in bytes of one frame record with `fields` values.
pub const fn record_len(fields: usize) -> usize {
    8 * fields + 2
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetadataStream {
    pub fields: usize,
    pub magic: u16,
    pub frame_count: usize,
    /// Frame-major values, `frame_count * fields` long.
    pub values: Vec<f64>,
}

impl MetadataStream {
    pub fn frames(&self) -> usize {
        self.frame_count
    }

    pub fn frame(&self, index: usize) -> &[f64] {
        &self.values[index * self.fields..(index + 1) * self.fields]
    }

    /// Interprets each frame as a 12-D pose.
    pub fn poses(&self) -> Result<Vec<PoseVector>> {
        if self.fields != POSE_DIM {
            return Err(Error::DimensionMismatch {
                expected: format!("{POSE_DIM} metadata fields"),
                actual: format!("{}", self.fields),
            });
        }
        Ok(self
            .values
            .chunks_exact(POSE_DIM)
            .map(|c| PoseVector::from_slice(c).expect("chunk length"))
            .collect())
    }
}

/// Encodes frames of `fields` values each; `values.len()` must be a multiple of `fields`.
pub fn encode_metadata(fields: usize, values: &[f64]) -> Result<Vec<u8>> {
    let fields32 = u32::try_from(fields).map_err(|_| Error::invalid("fields", "does not fit in 4 bytes"))?;
    if fields == 0 {
        return Err(Error::invalid("fields", "frames need at least one field"));
    }
    if !values.len().is_multiple_of(fields) {
        return Err(Error::DimensionMismatch {
            expected: format!("a multiple of {fields} values"),
            actual: format!("{}", values.len()),
        });
    }
    let frames = values.len() / fields;
    let mut out = Vec::with_capacity(HEADER_LEN + frames * record_len(fields));
    out.extend_from_slice(&fields32.to_le_bytes());
    for frame in values.chunks_exact(fields) {
        for v in frame {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out.extend_from_slice(&MAGIC.to_le_bytes());
    }
    Ok(out)
}

pub fn encode_poses(poses: &[PoseVector]) -> Vec<u8> {
    let flat: Vec<f64> = poses.iter().flat_map(|p| p.0).collect();
    encode_metadata(POSE_DIM, &flat).expect("pose frames are well formed")
}

/// Number of complete frames implied by a file length, without decoding.
pub fn frame_count(fields: usize, file_len: usize) -> Option<usize> {
    let body = file_len.checked_sub(HEADER_LEN)?;
    let rec = record_len(fields);
    (body % rec == 0).then_some(body / rec)
}

pub fn decode_metadata(bytes: &[u8]) -> Result<MetadataStream> {
    let header: [u8; HEADER_LEN] = bytes
        .get(..HEADER_LEN)
        .and_then(|h| h.try_into().ok())
        .ok_or_else(|| Error::decode(0, format!("truncated header: {} of {HEADER_LEN} bytes", bytes.len())))?;
    let fields = u32::from_le_bytes(header) as usize;
    let rec = record_len(fields);
    let body = &bytes[HEADER_LEN..];
    let rem = body.len() % rec;
    if rem != 0 {
        return Err(Error::decode(
            bytes.len() - rem,
            format!("trailing partial frame: {rem} of {rec} bytes"),
        ));
    }
    let frames = body.len() / rec;
    let mut values = Vec::with_capacity(frames * fields);
    let mut magic = None;
    for (frame, record) in body.chunks_exact(rec).enumerate() {
        let (data, tail) = record.split_at(8 * fields);
        let found = u16::from_le_bytes([tail[0], tail[1]]);
        match magic {
            None => magic = Some(found),
            Some(expected) if expected != found => {
                return Err(Error::MagicMismatch { frame, expected, found });
            }
            Some(_) => {}
        }
        values.extend(data.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))));
    }
    Ok(MetadataStream {
        fields,
        magic: magic.unwrap_or(MAGIC),
        frame_count: frames,
        values,
    })
}
