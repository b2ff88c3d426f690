//! Event-camera vision built around distribution-aware log-polar (DART)
//! descriptors: noise filtering, descriptor extraction, bag-of-words
//! classification, one-shot long-term tracking with re-detection, and
//! descriptor matching across time slices.

pub mod bench;
pub mod classify;
pub mod dart;
pub mod elot;
pub mod encoding;
pub mod eval;
pub mod events;
pub mod filter;
pub mod matching;
pub mod render;

pub use dart::{DartDescriptor, DartEngine, GridParams, LogPolarGrid};
pub use events::{BoundingBox, Event, EventStream, Timestamp};
