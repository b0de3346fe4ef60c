//! On-disk dataset formats: the event stream and the per-step metadata
//! stream, both little-endian.

pub mod events;
pub mod loader;
pub mod metadata;

pub use events::{
    decode_events, encode_events, encode_events_into, scan_events, steps_to_cover, DecodedEvents, Encoded,
    StreamSummary, DEFAULT_STEP_MICROS,
};
pub use loader::{load_paired, PairedDataset, Step};
pub use metadata::{decode_metadata, encode_metadata, encode_poses, record_len, MetadataStream};
