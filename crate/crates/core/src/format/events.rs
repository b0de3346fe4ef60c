//! Event stream file: a sequence of 4-byte blocks.
//!
//! ```text
//! byte 0..2  x  (u16 LE)
//! byte 2     y  (u8)
//! byte 3     p  (1 positive, 0 negative, 255 frame tick)
//! ```
//!
//! Time starts at zero and every tick block (`00 00 00 FF`) advances it by one
//! step. Events of a step are written before that step's tick.

use crate::error::{Error, Result};
use crate::event::{ensure_sorted, Event, Micros, Polarity};

pub const BLOCK_LEN: usize = 4;
pub const TICK: u8 = 255;
pub const POSITIVE: u8 = 1;
pub const NEGATIVE: u8 = 0;
/// One millisecond steps.
pub const DEFAULT_STEP_MICROS: Micros = 1000;

const TICK_BLOCK: [u8; BLOCK_LEN] = [0, 0, 0, TICK];

#[inline]
pub fn polarity_byte(p: Polarity) -> u8 {
    match p {
        Polarity::Positive => POSITIVE,
        Polarity::Negative => NEGATIVE,
    }
}

/// Maps an event byte (0 or 1) to its polarity; anything else reads as
/// negative.
#[inline]
fn polarity_from_byte(p: u8) -> Polarity {
    if p == POSITIVE {
        Polarity::Positive
    } else {
        Polarity::Negative
    }
}

#[inline]
fn block(e: &Event) -> [u8; BLOCK_LEN] {
    let x = e.x.to_le_bytes();
    [x[0], x[1], e.y as u8, polarity_byte(e.polarity)]
}

/// Encoder output; `quantized` counts events whose timestamps were not on the
/// step grid and were rounded down to it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Encoded {
    pub bytes: Vec<u8>,
    pub quantized: usize,
}

/// Appends `steps` steps of events to `out`, returning the quantized count.
pub fn encode_events_into(events: &[Event], steps: usize, step_micros: Micros, out: &mut Vec<u8>) -> Result<usize> {
    if step_micros == 0 {
        return Err(Error::invalid("step_micros", "must be at least 1us"));
    }
    ensure_sorted(events)?;
    out.reserve(BLOCK_LEN * (events.len() + steps));
    let mut quantized = 0;
    let mut step = 0usize;
    for (index, e) in events.iter().enumerate() {
        if e.y > u8::MAX as u16 {
            return Err(Error::Unencodable {
                index,
                reason: format!("y = {} does not fit in one byte", e.y),
            });
        }
        let event_step = (e.t / step_micros) as usize;
        if event_step >= steps {
            return Err(Error::Unencodable {
                index,
                reason: format!("t = {}us lies in step {event_step}, beyond the {steps} step(s) being written", e.t),
            });
        }
        while step < event_step {
            out.extend_from_slice(&TICK_BLOCK);
            step += 1;
        }
        if e.t % step_micros != 0 {
            quantized += 1;
        }
        out.extend_from_slice(&block(e));
    }
    while step < steps {
        out.extend_from_slice(&TICK_BLOCK);
        step += 1;
    }
    Ok(quantized)
}

pub fn encode_events(events: &[Event], steps: usize, step_micros: Micros) -> Result<Encoded> {
    let mut bytes = Vec::new();
    let quantized = encode_events_into(events, steps, step_micros, &mut bytes)?;
    Ok(Encoded { bytes, quantized })
}

/// Smallest step count that holds every event of a sorted stream.
pub fn steps_to_cover(events: &[Event], step_micros: Micros) -> usize {
    events.last().map_or(0, |e| (e.t / step_micros.max(1)) as usize + 1)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodedEvents {
    pub events: Vec<Event>,
    /// Number of tick blocks.
    pub steps: usize,
}

#[inline]
fn parse_block(chunk: &[u8], step: u64, step_micros: Micros, block_index: usize) -> Result<Option<Event>> {
    let p = chunk[3];
    let polarity = if p <= POSITIVE {
        polarity_from_byte(p)
    } else if p == TICK {
        return Ok(None);
    } else {
        return Err(Error::decode(
            block_index * BLOCK_LEN + 3,
            format!("invalid polarity byte {p} (expected 0, 1 or 255)"),
        ));
    };
    Ok(Some(Event {
        x: u16::from_le_bytes([chunk[0], chunk[1]]),
        y: chunk[2] as u16,
        t: step * step_micros,
        polarity,
    }))
}

fn check_length(bytes: &[u8]) -> Result<()> {
    let rem = bytes.len() % BLOCK_LEN;
    if rem != 0 {
        return Err(Error::decode(
            bytes.len() - rem,
            format!("truncated block: {rem} trailing byte(s)"),
        ));
    }
    Ok(())
}

/// Decodes a whole event stream. Timestamps are `step_index * step_micros`;
/// events after the final tick belong to the (unterminated) step that
/// follows it.
pub fn decode_events(bytes: &[u8], step_micros: Micros) -> Result<DecodedEvents> {
    check_length(bytes)?;
    let mut events = Vec::with_capacity(bytes.len() / BLOCK_LEN);
    let mut step = 0u64;
    for (i, chunk) in bytes.chunks_exact(BLOCK_LEN).enumerate() {
        match parse_block(chunk, step, step_micros, i)? {
            Some(e) => events.push(e),
            None => step += 1,
        }
    }
    events.shrink_to_fit();
    Ok(DecodedEvents {
        events,
        steps: step as usize,
    })
}

/// Counts without materialising events.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StreamSummary {
    pub steps: usize,
    pub positive: usize,
    pub negative: usize,
    /// Events after the last tick.
    pub trailing: usize,
    /// Block index of each tick, in order.
    pub tick_blocks: Vec<usize>,
}

impl StreamSummary {
    pub fn events(&self) -> usize {
        self.positive + self.negative
    }

    /// Event count of every complete step.
    pub fn events_per_step(&self) -> impl Iterator<Item = usize> + '_ {
        let mut prev = 0usize;
        self.tick_blocks.iter().map(move |&b| {
            let n = b - prev;
            prev = b + 1;
            n
        })
    }
}

/// Validates a stream and indexes its ticks in one pass.
pub fn scan_events(bytes: &[u8]) -> Result<StreamSummary> {
    check_length(bytes)?;
    let mut summary = StreamSummary::default();
    let mut since_tick = 0usize;
    let (mut events, mut positive) = (0usize, 0usize);
    for (i, chunk) in bytes.chunks_exact(BLOCK_LEN).enumerate() {
        let p = chunk[3];
        // event polarities are 0 or 1; counting them arithmetically keeps
        // the loop free of data-dependent branches
        if p <= POSITIVE {
            positive += p as usize;
            events += 1;
            since_tick += 1;
        } else if p == TICK {
            summary.tick_blocks.push(i);
            since_tick = 0;
        } else {
            return Err(Error::decode(
                i * BLOCK_LEN + 3,
                format!("invalid polarity byte {p} (expected 0, 1 or 255)"),
            ));
        }
    }
    summary.positive = positive;
    summary.negative = events - positive;
    summary.steps = summary.tick_blocks.len();
    summary.trailing = since_tick;
    Ok(summary)
}

/// Decodes the event blocks of one step (no ticks expected inside).
pub(crate) fn step_events(
    blocks: &[u8],
    step: usize,
    step_micros: Micros,
) -> impl Iterator<Item = Event> + '_ {
    let t = step as Micros * step_micros;
    blocks.chunks_exact(BLOCK_LEN).map(move |c| Event {
        x: u16::from_le_bytes([c[0], c[1]]),
        y: c[2] as u16,
        t,
        polarity: polarity_from_byte(c[3]),
    })
}
