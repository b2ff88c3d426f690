use super::{dist2, EncodingError};

/// `K` centroids of dimension `d`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    dim: usize,
    centroids: Vec<f64>,
}

impl Codebook {
    pub fn new(dim: usize, centroids: Vec<f64>) -> Result<Self, EncodingError> {
        if dim == 0 || !centroids.len().is_multiple_of(dim) {
            return Err(EncodingError::Config(format!(
                "{} values do not form rows of {dim}",
                centroids.len()
            )));
        }
        let k = centroids.len() / dim;
        if k < 2 {
            return Err(EncodingError::Config(format!(
                "codebook needs K >= 2, got {k}"
            )));
        }
        if centroids.iter().any(|v| !v.is_finite()) {
            return Err(EncodingError::Config("non-finite centroid".into()));
        }
        Ok(Self { dim, centroids })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, EncodingError> {
        let dim = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != dim) {
            return Err(EncodingError::Config("ragged centroid rows".into()));
        }
        Self::new(dim, rows.concat())
    }

    pub fn k(&self) -> usize {
        self.centroids.len() / self.dim
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn centroid(&self, i: usize) -> &[f64] {
        &self.centroids[i * self.dim..(i + 1) * self.dim]
    }

    pub fn centroids(&self) -> impl Iterator<Item = &[f64]> {
        self.centroids.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.centroids
    }

    /// Exact nearest centroid and its squared distance; lowest index wins ties.
    pub fn nearest(&self, x: &[f64]) -> (usize, f64) {
        assert_eq!(x.len(), self.dim, "query dimension");
        let mut best = (0, f64::INFINITY);
        for (i, c) in self.centroids().enumerate() {
            let d = dist2(x, c);
            if d < best.1 {
                best = (i, d);
            }
        }
        best
    }

    /// Centroids rounded to `f32`, matching what a codebook file stores.
    pub fn to_f32_precision(&self) -> Self {
        Self {
            dim: self.dim,
            centroids: self.centroids.iter().map(|&v| v as f32 as f64).collect(),
        }
    }
}
