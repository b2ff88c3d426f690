use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{DetectorModel, ElotError};
use crate::classify::{SparseVector, SvmModel, SvmParams};
use crate::dart::circular_shift_values;
use crate::encoding::{
    bow_pool, kernel_map_sparse, kmeans_train, Codebook, ForestParams, KMeansParams, KdForest,
    KernelMapParams,
};

/// Minimum number of descriptors per class for one-shot training.
pub const MIN_INIT_DESCRIPTORS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BootstrapConfig {
    pub k: usize,
    pub kmeans_iters: usize,
    /// Upper bound on the descriptors k-means sees; larger sets are
    /// subsampled without replacement.
    pub kmeans_sample: usize,
    /// Cap on descriptors drawn into one bootstrap replicate.
    pub replicate_size: usize,
    /// Purity a cluster needs to become a detector word.
    pub tau: f64,
    pub svm: SvmParams,
    pub forest: ForestParams,
    pub seed: u64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            k: 300,
            kmeans_iters: 30,
            kmeans_sample: 6000,
            replicate_size: 200,
            tau: 0.95,
            svm: SvmParams::default(),
            forest: ForestParams::default(),
            seed: 0,
        }
    }
}

/// Everything learnt from the initialization window.
#[derive(Debug, Clone)]
pub struct OneShotModel {
    pub codebook: Codebook,
    pub forest: KdForest,
    pub svm: SvmModel,
    pub detector: DetectorModel,
    pub kernel: KernelMapParams,
}

impl OneShotModel {
    /// Kernel-mapped, normalized histogram of codeword counts.
    pub fn feature(&self, counts: &[u32], total: u32) -> Result<SparseVector, ElotError> {
        histogram_feature(counts, total, &self.kernel)
    }
}

pub(crate) fn histogram_feature(
    counts: &[u32],
    total: u32,
    kernel: &KernelMapParams,
) -> Result<SparseVector, ElotError> {
    let inv = if total > 0 { 1.0 / total as f64 } else { 0.0 };
    let h: Vec<(usize, f64)> = counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(i, &c)| (i, c as f64 * inv))
        .collect();
    let mapped = kernel_map_sparse(&h, kernel)?;
    Ok(SparseVector::from_sorted(
        kernel.output_dim(counts.len()),
        mapped,
    ))
}

/// One-shot training: random circular shift of every descriptor, a k-means
/// codebook over both classes, bootstrap replicates pooled into SVM
/// samples, and the detector words of high ROI purity.
pub fn bootstrap_train(
    roi: &[Vec<f64>],
    background: &[Vec<f64>],
    n_wedges: usize,
    cfg: &BootstrapConfig,
    kernel: &KernelMapParams,
) -> Result<OneShotModel, ElotError> {
    if roi.len() < MIN_INIT_DESCRIPTORS || background.len() < MIN_INIT_DESCRIPTORS {
        return Err(ElotError::InsufficientInit {
            roi: roi.len(),
            background: background.len(),
        });
    }
    if !(cfg.tau > 0.0 && cfg.tau <= 1.0) || cfg.replicate_size == 0 {
        return Err(ElotError::Config(
            "need 0 < tau <= 1 and a positive replicate size".into(),
        ));
    }
    kernel.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let shifted: Vec<Vec<f64>> = roi
        .iter()
        .chain(background)
        .map(|d| {
            let f = (rng.gen::<f64>() * n_wedges as f64).floor() as usize;
            circular_shift_values(d, n_wedges, f.min(n_wedges - 1))
        })
        .collect();
    let n_roi = roi.len();
    if shifted.len() < cfg.k {
        return Err(ElotError::InsufficientInit {
            roi: roi.len(),
            background: background.len(),
        });
    }

    let train_idx: Vec<usize> = if shifted.len() > cfg.kmeans_sample.max(cfg.k) {
        let mut idx = sample(&mut rng, shifted.len(), cfg.kmeans_sample.max(cfg.k)).into_vec();
        idx.sort_unstable();
        idx
    } else {
        (0..shifted.len()).collect()
    };
    let train: Vec<&[f64]> = train_idx.iter().map(|&i| shifted[i].as_slice()).collect();
    let fit = kmeans_train(
        &train,
        &KMeansParams {
            k: cfg.k,
            max_iters: cfg.kmeans_iters,
            seed: rng.gen(),
        },
    )?;
    let codebook = fit.codebook;
    let words: Vec<usize> = shifted.iter().map(|d| codebook.nearest(d).0).collect();
    let (roi_words, bg_words) = words.split_at(n_roi);

    let detector = DetectorModel::from_assignments(roi_words, bg_words, cfg.k, cfg.tau);

    let mut samples = Vec::with_capacity(shifted.len());
    let mut labels = Vec::with_capacity(shifted.len());
    for (class_words, label) in [(roi_words, 1i8), (bg_words, -1i8)] {
        let draw = class_words.len().min(cfg.replicate_size);
        let mut picked = vec![0usize; draw];
        for _ in 0..class_words.len() {
            for p in picked.iter_mut() {
                *p = class_words[rng.gen_range(0..class_words.len())];
            }
            let h = bow_pool(&picked, cfg.k);
            let nz: Vec<(usize, f64)> = h
                .values
                .iter()
                .copied()
                .enumerate()
                .filter(|&(_, v)| v != 0.0)
                .collect();
            let mapped = kernel_map_sparse(&nz, kernel)?;
            samples.push(SparseVector::from_sorted(kernel.output_dim(cfg.k), mapped));
            labels.push(label);
        }
    }
    let (svm, _) = SvmModel::train(&samples, &labels, &cfg.svm)?;
    let forest = KdForest::build(&codebook, cfg.forest);
    Ok(OneShotModel {
        codebook,
        forest,
        svm,
        detector,
        kernel: *kernel,
    })
}
