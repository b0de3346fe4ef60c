use std::io;

use thiserror::Error;

use crate::representations::RepresentationKind;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("stream is not sorted by timestamp: event {index} at t={t}us follows t={previous}us")]
    UnsortedStream { index: usize, t: u64, previous: u64 },

    #[error("event {index} at ({x}, {y}) lies outside the {width}x{height} sensor")]
    EventOutOfBounds {
        index: usize,
        x: u16,
        y: u16,
        width: u16,
        height: u16,
    },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: String, actual: String },

    #[error("{kind:?} image given where {expected} is required")]
    WrongRepresentation {
        kind: RepresentationKind,
        expected: &'static str,
    },

    #[error("malformed data at byte offset {offset}: {reason}")]
    Decode { offset: usize, reason: String },

    #[error("metadata frame {frame}: magic {found:#06x} differs from file magic {expected:#06x}")]
    MagicMismatch { frame: usize, expected: u16, found: u16 },

    #[error("cannot encode event {index}: {reason}")]
    Unencodable { index: usize, reason: String },

    #[error("step count mismatch: metadata has {metadata} frames but event stream has {events} ticks ({metadata} \u{2260} {events})")]
    StepCountMismatch { metadata: usize, events: usize },

    #[error("parse error on line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn decode(offset: usize, reason: impl Into<String>) -> Self {
        Error::Decode {
            offset,
            reason: reason.into(),
        }
    }
}
