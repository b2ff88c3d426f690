//! Linear SVMs over kernel-mapped histograms and the stream classification
//! pipeline built on them.

pub mod io;
mod multiclass;
mod pipeline;
mod sparse;
mod svm;

pub use multiclass::MulticlassModel;
pub use pipeline::{collect_descriptors, EncodedStream, Encoder, EncoderConfig};
pub use sparse::SparseVector;
pub use svm::{SvmModel, SvmParams, TrainReport};

use thiserror::Error;

use crate::dart::DartError;
use crate::encoding::EncodingError;

#[derive(Debug, Error, PartialEq)]
pub enum ClassifyError {
    #[error("dimension mismatch: model has {expected}, input has {found}")]
    Shape { expected: usize, found: usize },
    #[error("training data needs at least one sample of each label")]
    DegenerateTraining,
    #[error("no events survived filtering")]
    NoEvidence,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("model file: {0}")]
    Format(String),
    #[error(transparent)]
    Encoding(#[from] EncodingError),
    #[error(transparent)]
    Dart(#[from] DartError),
}
