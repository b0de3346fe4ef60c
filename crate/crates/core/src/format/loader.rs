//! Paired loading of an event stream and its metadata stream.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::event::{Event, Micros};
use crate::format::events::{scan_events, step_events, StreamSummary, BLOCK_LEN, DEFAULT_STEP_MICROS};
use crate::format::metadata::{decode_metadata, MetadataStream};
use crate::pose::{PoseVector, POSE_DIM};

/// Both files held in memory with a per-step index into the event blocks.
///
/// Steps are borrowed straight from the raw event bytes; events are decoded
/// on demand.
#[derive(Debug, Clone)]
pub struct PairedDataset {
    event_bytes: Vec<u8>,
    /// Block index of every tick; step `k` spans the blocks between tick
    /// `k - 1` and tick `k`.
    ticks: Vec<usize>,
    metadata: MetadataStream,
    step_micros: Micros,
    summary: StreamSummary,
}

/// One simulation step: its events and ground-truth pose.
#[derive(Debug, Clone, Copy)]
pub struct Step<'a> {
    pub index: usize,
    pub pose: PoseVector,
    blocks: &'a [u8],
    step_micros: Micros,
}

impl<'a> Step<'a> {
    pub fn event_count(&self) -> usize {
        self.blocks.len() / BLOCK_LEN
    }

    /// Raw 4-byte blocks of this step's events.
    pub fn raw(&self) -> &'a [u8] {
        self.blocks
    }

    pub fn timestamp(&self) -> Micros {
        self.index as Micros * self.step_micros
    }

    pub fn events(&self) -> impl Iterator<Item = Event> + 'a {
        step_events(self.blocks, self.index, self.step_micros)
    }
}

/// Opens an event file and a metadata file written by one run.
pub fn load_paired(event_path: impl AsRef<Path>, metadata_path: impl AsRef<Path>) -> Result<PairedDataset> {
    let events = fs::read(event_path)?;
    let metadata = fs::read(metadata_path)?;
    PairedDataset::from_bytes(events, &metadata, DEFAULT_STEP_MICROS)
}

impl PairedDataset {
    pub fn from_bytes(event_bytes: Vec<u8>, metadata_bytes: &[u8], step_micros: Micros) -> Result<Self> {
        let summary = scan_events(&event_bytes)?;
        let metadata = decode_metadata(metadata_bytes)?;
        if metadata.fields != POSE_DIM {
            return Err(Error::DimensionMismatch {
                expected: format!("{POSE_DIM} metadata fields per frame"),
                actual: format!("{}", metadata.fields),
            });
        }
        if metadata.frames() != summary.steps {
            return Err(Error::StepCountMismatch {
                metadata: metadata.frames(),
                events: summary.steps,
            });
        }
        if summary.trailing != 0 {
            let offset = summary.tick_blocks.last().map_or(0, |&b| (b + 1) * BLOCK_LEN);
            return Err(Error::decode(
                offset,
                format!("{} event(s) after the final tick belong to no annotated step", summary.trailing),
            ));
        }
        Ok(PairedDataset {
            event_bytes,
            ticks: summary.tick_blocks.clone(),
            metadata,
            step_micros,
            summary,
        })
    }

    pub fn len(&self) -> usize {
        self.ticks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ticks.is_empty()
    }

    pub fn event_count(&self) -> usize {
        self.summary.events()
    }

    pub fn summary(&self) -> &StreamSummary {
        &self.summary
    }

    pub fn step_micros(&self) -> Micros {
        self.step_micros
    }

    pub fn metadata(&self) -> &MetadataStream {
        &self.metadata
    }

    pub fn step(&self, index: usize) -> Option<Step<'_>> {
        let end = *self.ticks.get(index)?;
        let start = if index == 0 { 0 } else { self.ticks[index - 1] + 1 };
        let pose = PoseVector::from_slice(self.metadata.frame(index)).expect("12 fields checked on open");
        Some(Step {
            index,
            pose,
            blocks: &self.event_bytes[start * BLOCK_LEN..end * BLOCK_LEN],
            step_micros: self.step_micros,
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = Step<'_>> + '_ {
        (0..self.len()).map(move |i| self.step(i).expect("index in range"))
    }

    /// Steps `[from, to)`, clamped to the dataset.
    pub fn range(&self, from: usize, to: usize) -> impl Iterator<Item = Step<'_>> + '_ {
        let to = to.min(self.len());
        (from.min(to)..to).map(move |i| self.step(i).expect("index in range"))
    }

    /// All events of steps `[from, to)`, in stream order.
    pub fn events_in(&self, from: usize, to: usize) -> Vec<Event> {
        self.range(from, to).flat_map(|s| s.events()).collect()
    }

    pub fn poses(&self) -> Vec<PoseVector> {
        self.metadata.poses().expect("12 fields checked on open")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event::Polarity;
    use crate::format::events::encode_events;
    use crate::format::metadata::encode_poses;

    fn dataset(steps: usize, frames: usize) -> Result<PairedDataset> {
        let events = vec![
            Event::new(1, 2, 0, Polarity::Positive),
            Event::new(3, 4, 0, Polarity::Negative),
            Event::new(5, 6, 2000, Polarity::Positive),
        ];
        let bytes = encode_events(&events, steps, 1000).unwrap().bytes;
        let poses: Vec<_> = (0..frames).map(|i| PoseVector([i as f64; 12])).collect();
        PairedDataset::from_bytes(bytes, &encode_poses(&poses), 1000)
    }

    #[test]
    fn steps_pair_events_and_poses() {
        let d = dataset(3, 3).unwrap();
        assert_eq!((d.len(), d.event_count()), (3, 3));
        let counts: Vec<_> = d.iter().map(|s| s.event_count()).collect();
        assert_eq!(counts, vec![2, 0, 1]);
        let last = d.step(2).unwrap();
        assert_eq!(last.pose, PoseVector([2.0; 12]));
        assert_eq!(last.events().collect::<Vec<_>>(), vec![Event::new(5, 6, 2000, Polarity::Positive)]);
        assert_eq!(d.events_in(0, 3).len(), 3);
        assert_eq!(d.range(1, 1).count(), 0);
        assert!(d.step(3).is_none());
    }

    #[test]
    fn mismatched_counts_name_both() {
        let err = dataset(4, 3).unwrap_err();
        assert!(matches!(err, Error::StepCountMismatch { metadata: 3, events: 4 }));
        let msg = dataset(1000, 999).unwrap_err().to_string();
        assert!(msg.contains("999 \u{2260} 1000"), "{msg}");
    }

    #[test]
    fn trailing_events_are_rejected() {
        let mut bytes = encode_events(&[], 1, 1000).unwrap().bytes;
        bytes.extend_from_slice(&[0, 0, 0, 1]);
        let err = PairedDataset::from_bytes(bytes, &encode_poses(&[PoseVector::default()]), 1000).unwrap_err();
        assert!(matches!(err, Error::Decode { offset: 4, .. }), "{err}");
    }
}
