use std::fmt::Write as _;

use super::{BoundingBox, EventIoError, Timestamp};

/// One half-open annotation window `[start, end)`. A `None` box means the
/// object is absent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnnotatedInterval {
    pub start: Timestamp,
    pub end: Timestamp,
    pub bbox: Option<BoundingBox>,
}

/// Sorted, non-overlapping annotation intervals.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AnnotationTrack {
    intervals: Vec<AnnotatedInterval>,
}

/// Default annotation granularity.
pub const DEFAULT_INTERVAL_US: Timestamp = 10_000;

impl AnnotationTrack {
    /// Sorts by start time and rejects overlaps.
    pub fn new(mut intervals: Vec<AnnotatedInterval>) -> Result<Self, EventIoError> {
        intervals.sort_by_key(|iv| (iv.start, iv.end));
        for w in intervals.windows(2) {
            if w[1].start < w[0].end {
                return Err(EventIoError::Overlap {
                    a_start: w[0].start,
                    a_end: w[0].end,
                    b_start: w[1].start,
                    b_end: w[1].end,
                });
            }
        }
        Ok(Self { intervals })
    }

    pub fn intervals(&self) -> &[AnnotatedInterval] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// The interval covering `t`, if any.
    pub fn at(&self, t: Timestamp) -> Option<&AnnotatedInterval> {
        let i = self.intervals.partition_point(|iv| iv.end <= t);
        self.intervals.get(i).filter(|iv| iv.start <= t)
    }
}

/// Parses `t_start t_end x_min y_min x_max y_max` lines, or `t_start t_end -`
/// for an absent object. `#` starts a comment line.
pub fn parse_annotations(text: &str) -> Result<AnnotationTrack, EventIoError> {
    let mut intervals = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|f| !f.is_empty())
            .collect();
        let num = |s: &str| -> Result<u64, EventIoError> {
            s.parse().map_err(|_| EventIoError::Parse {
                line,
                message: format!("bad number {s:?}"),
            })
        };
        let bbox = match fields.len() {
            3 if fields[2] == "-" => None,
            6 => {
                let c: Vec<u16> = fields[2..]
                    .iter()
                    .map(|f| {
                        num(f).and_then(|v| {
                            u16::try_from(v).map_err(|_| EventIoError::Parse {
                                line,
                                message: format!("coordinate {v} too large"),
                            })
                        })
                    })
                    .collect::<Result<_, _>>()?;
                Some(
                    BoundingBox::new(c[0], c[1], c[2], c[3])
                        .ok_or(EventIoError::InvalidBox { line })?,
                )
            }
            n => {
                return Err(EventIoError::Parse {
                    line,
                    message: format!("expected 3 or 6 fields, found {n}"),
                })
            }
        };
        let start = num(fields[0])?;
        let end = num(fields[1])?;
        if end <= start {
            return Err(EventIoError::InvalidInterval { line });
        }
        intervals.push(AnnotatedInterval { start, end, bbox });
    }
    AnnotationTrack::new(intervals)
}

pub fn write_annotations(track: &AnnotationTrack) -> String {
    let mut out = String::new();
    for iv in track.intervals() {
        match iv.bbox {
            Some(b) => {
                let _ = writeln!(
                    out,
                    "{} {} {} {} {} {}",
                    iv.start, iv.end, b.x_min, b.y_min, b.x_max, b.y_max
                );
            }
            None => {
                let _ = writeln!(out, "{} {} -", iv.start, iv.end);
            }
        }
    }
    out
}
