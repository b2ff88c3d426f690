//! Vector quantization and pooling: k-means codebooks, a randomized
//! kd-forest for approximate nearest-codeword lookup, bag-of-words and
//! spatial-pyramid histograms, and the homogeneous χ² kernel map.

mod bow;
mod codebook;
mod forest;
pub mod io;
mod kernel_map;
mod kmeans;

pub use bow::{bow_pool, spm_pool, BowHistogram, SpmAccumulator, SpmParams, SpmVector};
pub use codebook::Codebook;
pub use forest::{ForestParams, KdForest, SearchStats};
pub use kernel_map::{kernel_map, kernel_map_into, kernel_map_sparse, KernelMapParams};
pub use kmeans::{kmeans_train, KMeansFit, KMeansParams};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EncodingError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("component {index} is negative ({value})")]
    Domain { index: usize, value: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("codebook file: {0}")]
    Format(String),
}

/// Squared Euclidean distance.
#[inline]
pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Codeword lookup: exact when no forest is given.
pub fn quantize(x: &[f64], codebook: &Codebook, forest: Option<&KdForest>) -> usize {
    match forest {
        Some(f) => f.nearest(codebook, x),
        None => codebook.nearest(x).0,
    }
}
