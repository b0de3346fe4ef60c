//! Fixed-length, fixed-stride windows over a sorted event stream.
//!
//! Windows are half-open, `[start, start + length)`, and window `k` starts at
//! `k * stride`. Windows without events are still yielded so a downstream
//! consumer clocked at the stride keeps its cadence.

use crate::error::{Error, Result};
use crate::event::{ensure_sorted, Event, Micros};

/// A borrowed view of the events in `[start, start + length)`, oldest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EventWindow<'a> {
    pub start: Micros,
    pub length: Micros,
    pub events: &'a [Event],
}

impl<'a> EventWindow<'a> {
    /// Selects the events of `stream` that fall inside `[start, start + length)`.
    ///
    /// `stream` must be sorted by timestamp.
    pub fn from_sorted(stream: &'a [Event], start: Micros, length: Micros) -> Self {
        let end = start.saturating_add(length);
        let lo = stream.partition_point(|e| e.t < start);
        let hi = lo + stream[lo..].partition_point(|e| e.t < end);
        EventWindow {
            start,
            length,
            events: &stream[lo..hi],
        }
    }

    #[inline]
    pub fn end(&self) -> Micros {
        self.start.saturating_add(self.length)
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// The trailing sub-window of `new_length` sharing this window's end time.
    ///
    /// A length at or above the current one keeps every event; the start
    /// moves back accordingly (saturating at zero).
    pub fn trailing(&self, new_length: Micros) -> EventWindow<'a> {
        let end = self.end();
        let start = end.saturating_sub(new_length);
        let lo = self.events.partition_point(|e| e.t < start);
        EventWindow {
            start,
            length: end - start,
            events: &self.events[lo..],
        }
    }
}

/// Where a window sequence stops.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WindowSpan {
    /// Until every event has been covered: the last window starts at or
    /// before the final event. An empty stream yields no windows.
    #[default]
    CoverEvents,
    /// Only windows lying entirely inside `[0, end)`.
    FullWithin(Micros),
    /// Every window starting before `end`.
    StartsBefore(Micros),
}

/// Lazy single-pass iterator over [`EventWindow`]s.
#[derive(Debug, Clone)]
pub struct Windows<'a> {
    stream: &'a [Event],
    length: Micros,
    stride: Micros,
    span: WindowSpan,
    next_index: u64,
    lo: usize,
    hi: usize,
}

/// Creates overlapping windows of `length` microseconds every `stride`
/// microseconds. Rejects unsorted streams, naming the first offending index.
pub fn slide_windows(stream: &[Event], length: Micros, stride: Micros) -> Result<Windows<'_>> {
    if stride == 0 {
        return Err(Error::invalid("stride", "must be at least 1us"));
    }
    if length < stride {
        return Err(Error::invalid(
            "length",
            format!("window length {length}us is shorter than stride {stride}us"),
        ));
    }
    ensure_sorted(stream)?;
    Ok(Windows {
        stream,
        length,
        stride,
        span: WindowSpan::CoverEvents,
        next_index: 0,
        lo: 0,
        hi: 0,
    })
}

impl<'a> Windows<'a> {
    pub fn with_span(mut self, span: WindowSpan) -> Self {
        self.span = span;
        self
    }

    pub fn length(&self) -> Micros {
        self.length
    }

    pub fn stride(&self) -> Micros {
        self.stride
    }

    fn start_of(&self, index: u64) -> Option<Micros> {
        index.checked_mul(self.stride)
    }

    fn admits(&self, start: Micros) -> bool {
        match self.span {
            WindowSpan::CoverEvents => self.stream.last().is_some_and(|last| start <= last.t),
            WindowSpan::FullWithin(end) => start
                .checked_add(self.length)
                .is_some_and(|window_end| window_end <= end),
            WindowSpan::StartsBefore(end) => start < end,
        }
    }
}

impl<'a> Iterator for Windows<'a> {
    type Item = EventWindow<'a>;

    fn next(&mut self) -> Option<Self::Item> {
        let start = self.start_of(self.next_index)?;
        if !self.admits(start) {
            return None;
        }
        let end = start.saturating_add(self.length);
        while self.lo < self.stream.len() && self.stream[self.lo].t < start {
            self.lo += 1;
        }
        self.hi = self.hi.max(self.lo);
        while self.hi < self.stream.len() && self.stream[self.hi].t < end {
            self.hi += 1;
        }
        self.next_index += 1;
        Some(EventWindow {
            start,
            length: self.length,
            events: &self.stream[self.lo..self.hi],
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event::Polarity;

    fn at(ts: &[Micros]) -> Vec<Event> {
        ts.iter()
            .map(|&t| Event::new(0, 0, t, Polarity::Positive))
            .collect()
    }

    fn times(w: &EventWindow<'_>) -> Vec<Micros> {
        w.events.iter().map(|e| e.t).collect()
    }

    #[test]
    fn non_overlapping_membership() {
        let s = at(&[0, 500, 1500]);
        let ws: Vec<_> = slide_windows(&s, 1000, 1000).unwrap().collect();
        assert_eq!(ws.len(), 2);
        assert_eq!(times(&ws[0]), vec![0, 500]);
        assert_eq!(times(&ws[1]), vec![1500]);
        assert_eq!(ws[1].start, 1000);
    }

    #[test]
    fn overlap_is_length_minus_stride() {
        let s = at(&[0, 150_000]);
        let ws: Vec<_> = slide_windows(&s, 100_000, 1_000).unwrap().take(3).collect();
        for pair in ws.windows(2) {
            assert_eq!(pair[0].end() - pair[1].start, 99_000);
        }
    }

    #[test]
    fn empty_stream_yields_nothing() {
        assert_eq!(slide_windows(&[], 10, 1).unwrap().count(), 0);
    }

    #[test]
    fn empty_windows_are_yielded() {
        let s = at(&[0, 5000]);
        let ws: Vec<_> = slide_windows(&s, 1000, 1000).unwrap().collect();
        assert_eq!(ws.len(), 6);
        assert!(ws[1..5].iter().all(|w| w.is_empty()));
    }

    #[test]
    fn boundary_event_goes_to_next_window() {
        let s = at(&[1000]);
        let ws: Vec<_> = slide_windows(&s, 1000, 1000).unwrap().collect();
        assert!(ws[0].is_empty());
        assert_eq!(times(&ws[1]), vec![1000]);
    }

    #[test]
    fn rejects_bad_parameters_and_unsorted_input() {
        assert!(slide_windows(&[], 10, 0).is_err());
        assert!(slide_windows(&[], 5, 10).is_err());
        let err = slide_windows(&at(&[0, 7, 3]), 10, 10).unwrap_err();
        assert!(matches!(err, Error::UnsortedStream { index: 2, .. }), "{err}");
    }

    #[test]
    fn full_within_span_counts() {
        let s = at(&[0]);
        let n = slide_windows(&s, 100_000, 1_000)
            .unwrap()
            .with_span(WindowSpan::FullWithin(1_000_000))
            .count();
        assert_eq!(n, 901);
    }

    #[test]
    fn trailing_subwindow() {
        let s = at(&[0, 50_000, 66_999, 67_000, 99_999]);
        let w = EventWindow::from_sorted(&s, 0, 100_000);
        let short = w.trailing(33_000);
        assert_eq!(short.start, 67_000);
        assert_eq!(times(&short), vec![67_000, 99_999]);
        assert_eq!(w.trailing(100_000), w);
        assert_eq!(times(&w.trailing(1)), vec![99_999]);
    }
}
