//! Descriptor extraction throughput.

use std::sync::Arc;
use std::time::Instant;

use crate::dart::{DartEngine, DartError, LogPolarGrid};
use crate::events::EventStream;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchReport {
    pub events: usize,
    pub seconds: f64,
    pub events_per_sec: f64,
    /// Sum of one entry per descriptor, selected by timestamp; keeps the
    /// work observable and lets runs be compared for identical output.
    pub checksum: f64,
}

/// Pushes and describes every event of `stream` on one thread, best of
/// `repeats` timed passes.
pub fn extract_throughput(
    stream: &EventStream,
    grid: &Arc<LogPolarGrid>,
    fifo_capacity: usize,
    repeats: usize,
) -> Result<BenchReport, DartError> {
    let mut best = f64::INFINITY;
    let mut checksum = 0.0;
    for _ in 0..repeats.max(1) {
        let mut engine =
            DartEngine::new(grid.clone(), stream.width(), stream.height(), fifo_capacity)?;
        let mut buf = vec![0.0; grid.dim()];
        let mut sum = 0.0;
        let start = Instant::now();
        for e in stream.events() {
            engine.push(e);
            engine.describe_into(e.x, e.y, &mut buf);
            sum += buf[e.t as usize % buf.len()];
        }
        let elapsed = start.elapsed().as_secs_f64();
        best = best.min(elapsed);
        checksum = sum;
    }
    let events = stream.len();
    Ok(BenchReport {
        events,
        seconds: best,
        events_per_sec: if best > 0.0 {
            events as f64 / best
        } else {
            f64::INFINITY
        },
        checksum,
    })
}
