use std::fmt::Write as _;

use super::{Event, EventIoError, EventStream, Source};

/// Parses `t x y p` lines, `t` in decimal seconds. Blank lines and lines
/// starting with `#` are skipped. Unsorted input is rejected, not sorted.
pub fn parse_text_events(text: &str, width: u16, height: u16) -> Result<EventStream, EventIoError> {
    let mut events = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(EventIoError::Parse {
                line,
                message: format!("expected 4 fields, found {}", fields.len()),
            });
        }
        let secs: f64 = fields[0].parse().map_err(|_| EventIoError::Parse {
            line,
            message: format!("bad timestamp {:?}", fields[0]),
        })?;
        if secs < 0.0 || fields[0].starts_with('-') {
            return Err(EventIoError::InvalidTimestamp { line });
        }
        if !secs.is_finite() {
            return Err(EventIoError::Parse {
                line,
                message: "non-finite timestamp".into(),
            });
        }
        let coord = |s: &str, name: &str| -> Result<u16, EventIoError> {
            s.parse().map_err(|_| EventIoError::Parse {
                line,
                message: format!("bad {name} {s:?}"),
            })
        };
        let x = coord(fields[1], "x")?;
        let y = coord(fields[2], "y")?;
        let p = match fields[3] {
            "0" => false,
            "1" => true,
            other => {
                return Err(EventIoError::Parse {
                    line,
                    message: format!("bad polarity {other:?}"),
                })
            }
        };
        events.push(Event {
            x,
            y,
            t: (secs * 1e6).round() as u64,
            p,
        });
    }
    EventStream::new(events, width, height, Source::Text)
}

/// Writes one `t x y p` line per event with six decimals, so parsing the
/// output reproduces the microsecond timestamps exactly.
pub fn write_text_events(stream: &EventStream) -> String {
    let mut out = String::with_capacity(stream.len() * 20);
    for e in stream.events() {
        let _ = writeln!(
            out,
            "{}.{:06} {} {} {}",
            e.t / 1_000_000,
            e.t % 1_000_000,
            e.x,
            e.y,
            e.p as u8
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_lines() {
        let s = parse_text_events("0.003811 96 133 0\n", 240, 180).unwrap();
        assert_eq!(s.events()[0], Event::new(96, 133, 3811, false));
        let s = parse_text_events("0 0 0 1", 240, 180).unwrap();
        assert_eq!(s.events()[0], Event::new(0, 0, 0, true));
        let s = parse_text_events("1.000000 239 179 1", 240, 180).unwrap();
        assert_eq!(s.events()[0], Event::new(239, 179, 1_000_000, true));
    }

    #[test]
    fn errors() {
        assert!(matches!(
            parse_text_events("0 0 0 1\n0.1 1 1", 10, 10),
            Err(EventIoError::Parse { line: 2, .. })
        ));
        assert_eq!(
            parse_text_events("-0.5 1 1 0", 10, 10).unwrap_err(),
            EventIoError::InvalidTimestamp { line: 1 }
        );
        assert!(matches!(
            parse_text_events("0.2 1 1 0\n0.1 1 1 0", 10, 10),
            Err(EventIoError::Unsorted { index: 1, .. })
        ));
        assert!(matches!(
            parse_text_events("0.2 10 1 0", 10, 10),
            Err(EventIoError::OutOfBounds { index: 0, .. })
        ));
    }

    proptest! {
        #[test]
        fn write_then_parse_is_identity(mut recs in proptest::collection::vec((0u16..240, 0u16..180, any::<bool>(), 0u64..100_000_000), 0..50)) {
            recs.sort_by_key(|r| r.3);
            let events = recs.iter().map(|&(x, y, p, t)| Event::new(x, y, t, p)).collect();
            let s = EventStream::new(events, 240, 180, Source::Text).unwrap();
            let back = parse_text_events(&write_text_events(&s), 240, 180).unwrap();
            prop_assert_eq!(back, s);
        }
    }
}
