use super::{Event, EventIoError, EventStream, Source};

const RECORD: usize = 5;
const MAX_T: u64 = (1 << 23) - 1;

/// Decodes the 5-byte AER layout: `x`, `y`, then a 24-bit big-endian word
/// whose top bit is the polarity and whose low 23 bits are the timestamp.
pub fn parse_aer5(bytes: &[u8], width: u16, height: u16) -> Result<EventStream, EventIoError> {
    if !bytes.len().is_multiple_of(RECORD) {
        return Err(EventIoError::TruncatedRecord(bytes.len()));
    }
    let events = bytes
        .chunks_exact(RECORD)
        .map(|r| Event {
            x: r[0] as u16,
            y: r[1] as u16,
            p: r[2] & 0x80 != 0,
            t: ((r[2] as u64 & 0x7F) << 16) | ((r[3] as u64) << 8) | r[4] as u64,
        })
        .collect();
    EventStream::new(events, width, height, Source::Aer5)
}

/// Inverse of [`parse_aer5`]. Panics if a coordinate exceeds 255 or a
/// timestamp exceeds 23 bits, since the format cannot hold either.
pub fn write_aer5(stream: &EventStream) -> Vec<u8> {
    let mut out = Vec::with_capacity(stream.len() * RECORD);
    for e in stream.events() {
        assert!(e.x <= 255 && e.y <= 255, "AER5 coordinates are 8-bit");
        assert!(e.t <= MAX_T, "AER5 timestamps are 23-bit");
        out.push(e.x as u8);
        out.push(e.y as u8);
        out.push(((e.t >> 16) as u8 & 0x7F) | if e.p { 0x80 } else { 0 });
        out.push((e.t >> 8) as u8);
        out.push(e.t as u8);
    }
    out
}
