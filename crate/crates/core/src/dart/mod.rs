//! Distribution-aware log-polar event descriptors.
//!
//! A [`LogPolarGrid`] fixes the ring/wedge geometry and precomputes, for every
//! integer pixel offset inside the outer radius, how a past event at that
//! offset splits over its (up to) four neighbouring bins. A [`DartEngine`]
//! keeps the most recent events in a FIFO mirrored by a per-pixel count
//! matrix; describing an event sums the table weights over the count window
//! around it and L1-normalizes the result.

mod descriptor;
mod engine;
mod grid;
pub mod io;

pub use descriptor::{circular_shift_values, DartDescriptor};
pub use engine::{DartEngine, DEFAULT_FIFO_CAPACITY};
pub use grid::{cart_to_polar, BinWeight, GridParams, LogPolarGrid, LutEntry, Weights};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DartError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("offset coincides with the grid center")]
    CenterEvent,
    #[error("radius {r} exceeds r_max = {r_max}")]
    OutOfRange { r: f64, r_max: f64 },
    #[error("descriptor file: {0}")]
    Format(String),
}
