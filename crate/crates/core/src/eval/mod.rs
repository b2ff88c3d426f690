//! Tracking and classification metrics, and a synthetic scene generator
//! with exact ground truth.

mod metrics;
mod synth;

pub use metrics::{
    accuracy, cle_metric, evaluate_track, iou_interval, os_metric, predictions_per_interval,
    Accuracy, CleSummary, IntervalMetrics, IntervalRecord, TrackEvaluation,
    DEFAULT_OVERLAP_THRESHOLD,
};
pub use synth::{synth_generate, Keyframe, SyntheticScene, SyntheticSceneConfig};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("no interval carries ground truth")]
    NoGroundTruth,
    #[error("no interval reached the overlap threshold")]
    NoSuccesses,
    #[error("no predictions to score")]
    Empty,
    #[error("invalid configuration: {0}")]
    Config(String),
}
