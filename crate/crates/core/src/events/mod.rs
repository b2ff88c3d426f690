//! Event streams, bounding boxes and annotation tracks, plus the on-disk
//! formats used to move them around: the 5-byte AER record layout, a
//! line-oriented `t x y p` text format and an interval annotation format.
//!
//! All timestamps are unsigned integer microseconds.

mod aer;
mod annotations;
mod text;

pub use aer::{parse_aer5, write_aer5};
pub use annotations::{
    parse_annotations, write_annotations, AnnotatedInterval, AnnotationTrack, DEFAULT_INTERVAL_US,
};
pub use text::{parse_text_events, write_text_events};

use thiserror::Error;

/// Microsecond timestamp.
pub type Timestamp = u64;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EventIoError {
    #[error("byte length {0} is not a multiple of the 5-byte record size")]
    TruncatedRecord(usize),
    #[error("event {index} at ({x}, {y}) lies outside the {width}x{height} sensor")]
    OutOfBounds {
        index: usize,
        x: u32,
        y: u32,
        width: u16,
        height: u16,
    },
    #[error("event {index} has timestamp {t} earlier than its predecessor {prev}")]
    Unsorted {
        index: usize,
        t: Timestamp,
        prev: Timestamp,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: negative timestamp")]
    InvalidTimestamp { line: usize },
    #[error("annotation intervals [{a_start}, {a_end}) and [{b_start}, {b_end}) overlap")]
    Overlap {
        a_start: Timestamp,
        a_end: Timestamp,
        b_start: Timestamp,
        b_end: Timestamp,
    },
    #[error("line {line}: inverted bounding box")]
    InvalidBox { line: usize },
    #[error("line {line}: interval end must be after its start")]
    InvalidInterval { line: usize },
}

/// A single sensor spike.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Event {
    pub x: u16,
    pub y: u16,
    pub t: Timestamp,
    /// Polarity bit. Carried through for I/O and rendering only.
    pub p: bool,
}

impl Event {
    pub const fn new(x: u16, y: u16, t: Timestamp, p: bool) -> Self {
        Self { x, y, t, p }
    }
}

/// Where a stream came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Source {
    Aer5,
    Text,
    Synthetic,
    #[default]
    Unknown,
}

/// Time-ordered events from one sensor.
///
/// Construction validates bounds and ordering, so every stream in circulation
/// satisfies both.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventStream {
    events: Vec<Event>,
    width: u16,
    height: u16,
    source: Source,
}

impl EventStream {
    pub fn new(
        events: Vec<Event>,
        width: u16,
        height: u16,
        source: Source,
    ) -> Result<Self, EventIoError> {
        let mut prev = 0;
        for (index, e) in events.iter().enumerate() {
            if e.x >= width || e.y >= height {
                return Err(EventIoError::OutOfBounds {
                    index,
                    x: e.x as u32,
                    y: e.y as u32,
                    width,
                    height,
                });
            }
            if e.t < prev {
                return Err(EventIoError::Unsorted {
                    index,
                    t: e.t,
                    prev,
                });
            }
            prev = e.t;
        }
        Ok(Self {
            events,
            width,
            height,
            source,
        })
    }

    pub fn empty(width: u16, height: u16) -> Self {
        Self {
            events: Vec::new(),
            width,
            height,
            source: Source::Unknown,
        }
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn into_events(self) -> Vec<Event> {
        self.events
    }

    pub fn width(&self) -> u16 {
        self.width
    }

    pub fn height(&self) -> u16 {
        self.height
    }

    pub fn source(&self) -> Source {
        self.source
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn first_t(&self) -> Option<Timestamp> {
        self.events.first().map(|e| e.t)
    }

    pub fn last_t(&self) -> Option<Timestamp> {
        self.events.last().map(|e| e.t)
    }

    /// Events with `t0 <= t < t1`, in order.
    pub fn slice(&self, t0: Timestamp, t1: Timestamp) -> EventStream {
        let range = self.slice_range(t0, t1);
        EventStream {
            events: self.events[range].to_vec(),
            width: self.width,
            height: self.height,
            source: self.source,
        }
    }

    /// Index range of the events with `t0 <= t < t1`.
    pub fn slice_range(&self, t0: Timestamp, t1: Timestamp) -> std::ops::Range<usize> {
        if t1 <= t0 {
            let i = self.events.partition_point(|e| e.t < t0);
            return i..i;
        }
        let lo = self.events.partition_point(|e| e.t < t0);
        let hi = self.events.partition_point(|e| e.t < t1);
        lo..hi
    }

    /// Keeps the events selected by `keep`, preserving order.
    pub fn retain_mask(&self, keep: &[bool]) -> EventStream {
        debug_assert_eq!(keep.len(), self.events.len());
        let events = self
            .events
            .iter()
            .zip(keep)
            .filter_map(|(e, &k)| k.then_some(*e))
            .collect();
        EventStream {
            events,
            width: self.width,
            height: self.height,
            source: self.source,
        }
    }

    pub(crate) fn with_events_unchecked(&self, events: Vec<Event>) -> EventStream {
        EventStream {
            events,
            width: self.width,
            height: self.height,
            source: self.source,
        }
    }
}

/// Inclusive pixel rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BoundingBox {
    pub x_min: u16,
    pub y_min: u16,
    pub x_max: u16,
    pub y_max: u16,
}

impl BoundingBox {
    /// Returns `None` for an inverted box.
    pub fn new(x_min: u16, y_min: u16, x_max: u16, y_max: u16) -> Option<Self> {
        (x_min <= x_max && y_min <= y_max).then_some(Self {
            x_min,
            y_min,
            x_max,
            y_max,
        })
    }

    pub fn whole_sensor(width: u16, height: u16) -> Self {
        Self {
            x_min: 0,
            y_min: 0,
            x_max: width.saturating_sub(1),
            y_max: height.saturating_sub(1),
        }
    }

    pub fn width(&self) -> u32 {
        (self.x_max - self.x_min) as u32 + 1
    }

    pub fn height(&self) -> u32 {
        (self.y_max - self.y_min) as u32 + 1
    }

    pub fn area(&self) -> u64 {
        self.width() as u64 * self.height() as u64
    }

    pub fn contains(&self, x: u16, y: u16) -> bool {
        x >= self.x_min && x <= self.x_max && y >= self.y_min && y <= self.y_max
    }

    pub fn center(&self) -> (f64, f64) {
        (
            (self.x_min as f64 + self.x_max as f64) / 2.0,
            (self.y_min as f64 + self.y_max as f64) / 2.0,
        )
    }

    /// Length of the diagonal measured over the covered pixel extent.
    pub fn diagonal(&self) -> f64 {
        (self.width() as f64).hypot(self.height() as f64)
    }

    /// Grows the box by `(px, py)` on every side, clamped to the sensor.
    pub fn padded(&self, px: u16, py: u16, width: u16, height: u16) -> Self {
        Self {
            x_min: self.x_min.saturating_sub(px),
            y_min: self.y_min.saturating_sub(py),
            x_max: self.x_max.saturating_add(px).min(width.saturating_sub(1)),
            y_max: self.y_max.saturating_add(py).min(height.saturating_sub(1)),
        }
    }

    pub fn intersection(&self, other: &Self) -> Option<Self> {
        Self::new(
            self.x_min.max(other.x_min),
            self.y_min.max(other.y_min),
            self.x_max.min(other.x_max),
            self.y_max.min(other.y_max),
        )
    }

    /// Tight box around a set of points; `None` when empty.
    pub fn enclosing<I: IntoIterator<Item = (u16, u16)>>(points: I) -> Option<Self> {
        let mut it = points.into_iter();
        let (x, y) = it.next()?;
        let mut b = Self {
            x_min: x,
            y_min: y,
            x_max: x,
            y_max: y,
        };
        for (x, y) in it {
            b.x_min = b.x_min.min(x);
            b.y_min = b.y_min.min(y);
            b.x_max = b.x_max.max(x);
            b.y_max = b.y_max.max(y);
        }
        Some(b)
    }
}
