use serde::{Deserialize, Serialize};

use super::EncodingError;

/// Codeword frequencies of one pooled set of descriptors.
#[derive(Debug, Clone, PartialEq)]
pub struct BowHistogram {
    pub values: Vec<f64>,
    /// Number of pooled descriptors.
    pub count: usize,
}

/// Frequency histogram; all-zero for an empty input.
pub fn bow_pool(indices: &[usize], k: usize) -> BowHistogram {
    let mut values = vec![0.0; k];
    for &i in indices {
        assert!(i < k, "codeword {i} out of range for K = {k}");
        values[i] += 1.0;
    }
    if !indices.is_empty() {
        let inv = 1.0 / indices.len() as f64;
        values.iter_mut().for_each(|v| *v *= inv);
    }
    BowHistogram {
        values,
        count: indices.len(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpmParams {
    /// Grid side per pyramid level.
    pub levels: Vec<usize>,
}

impl Default for SpmParams {
    fn default() -> Self {
        Self {
            levels: vec![1, 2, 3],
        }
    }
}

impl SpmParams {
    /// Plain bag of words: a single 1x1 cell.
    pub fn flat() -> Self {
        Self { levels: vec![1] }
    }

    pub fn n_cells(&self) -> usize {
        self.levels.iter().map(|g| g * g).sum()
    }

    pub fn validate(&self) -> Result<(), EncodingError> {
        if self.levels.is_empty() || self.levels.contains(&0) {
            return Err(EncodingError::Config(
                "pyramid levels must be a non-empty list of positive grid sizes".into(),
            ));
        }
        Ok(())
    }
}

/// Concatenated per-cell histograms, `n_cells * K` long.
#[derive(Debug, Clone, PartialEq)]
pub struct SpmVector {
    pub values: Vec<f64>,
    pub k: usize,
    pub count: usize,
}

/// Running per-cell codeword counts; lets a prefix of a stream be pooled
/// and inspected without re-reading earlier events.
#[derive(Debug, Clone)]
pub struct SpmAccumulator {
    params: SpmParams,
    width: u16,
    height: u16,
    k: usize,
    counts: Vec<u32>,
    cell_totals: Vec<u32>,
    count: usize,
}

impl SpmAccumulator {
    pub fn new(
        params: SpmParams,
        width: u16,
        height: u16,
        k: usize,
    ) -> Result<Self, EncodingError> {
        params.validate()?;
        if width == 0 || height == 0 || k == 0 {
            return Err(EncodingError::Config("empty pooling domain".into()));
        }
        let cells = params.n_cells();
        Ok(Self {
            params,
            width,
            height,
            k,
            counts: vec![0; cells * k],
            cell_totals: vec![0; cells],
            count: 0,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn clear(&mut self) {
        self.counts.iter_mut().for_each(|c| *c = 0);
        self.cell_totals.iter_mut().for_each(|c| *c = 0);
        self.count = 0;
    }

    pub fn add(&mut self, x: u16, y: u16, word: usize) {
        assert!(
            x < self.width && y < self.height,
            "({x}, {y}) outside pooling domain"
        );
        assert!(
            word < self.k,
            "codeword {word} out of range for K = {}",
            self.k
        );
        let mut base = 0;
        for &g in &self.params.levels {
            let cx = x as usize * g / self.width as usize;
            let cy = y as usize * g / self.height as usize;
            let cell = base + cy * g + cx;
            self.counts[cell * self.k + word] += 1;
            self.cell_totals[cell] += 1;
            base += g * g;
        }
        self.count += 1;
    }

    /// Per-cell L1 normalization followed by a global L1 normalization.
    pub fn vector(&self) -> SpmVector {
        let mut values = vec![0.0; self.counts.len()];
        let mut nonempty = 0usize;
        for (cell, &total) in self.cell_totals.iter().enumerate() {
            if total == 0 {
                continue;
            }
            nonempty += 1;
            let inv = 1.0 / total as f64;
            let block = cell * self.k..(cell + 1) * self.k;
            for (v, &c) in values[block.clone()].iter_mut().zip(&self.counts[block]) {
                *v = c as f64 * inv;
            }
        }
        if nonempty > 0 {
            let sum: f64 = values.iter().sum();
            values.iter_mut().for_each(|v| *v /= sum);
        }
        SpmVector {
            values,
            k: self.k,
            count: self.count,
        }
    }
}

pub fn spm_pool(
    items: &[(u16, u16, usize)],
    width: u16,
    height: u16,
    k: usize,
    params: &SpmParams,
) -> Result<SpmVector, EncodingError> {
    let mut acc = SpmAccumulator::new(params.clone(), width, height, k)?;
    for &(x, y, w) in items {
        acc.add(x, y, w);
    }
    Ok(acc.vector())
}
