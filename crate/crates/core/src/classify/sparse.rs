/// Sparse real vector with strictly increasing indices.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseVector {
    dim: usize,
    indices: Vec<u32>,
    values: Vec<f64>,
}

impl SparseVector {
    /// Builds from `(index, value)` pairs; entries must be sorted by index
    /// without repeats and lie below `dim`.
    pub fn from_sorted(dim: usize, entries: impl IntoIterator<Item = (usize, f64)>) -> Self {
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for (i, v) in entries {
            assert!(i < dim, "index {i} outside dimension {dim}");
            if let Some(&last) = indices.last() {
                assert!((i as u32) > last, "indices must increase");
            }
            if v != 0.0 {
                indices.push(i as u32);
                values.push(v);
            }
        }
        Self {
            dim,
            indices,
            values,
        }
    }

    pub fn from_dense(x: &[f64]) -> Self {
        Self::from_sorted(x.len(), x.iter().copied().enumerate())
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            ..Self::default()
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices
            .iter()
            .map(|&i| i as usize)
            .zip(self.values.iter().copied())
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (i, v) in self.iter() {
            out[i] = v;
        }
        out
    }

    pub fn dot_dense(&self, w: &[f64]) -> f64 {
        debug_assert_eq!(w.len(), self.dim);
        self.iter().map(|(i, v)| w[i] * v).sum()
    }

    pub fn norm2(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    /// `w += alpha * self`
    pub fn axpy_into(&self, alpha: f64, w: &mut [f64]) {
        for (i, v) in self.iter() {
            w[i] += alpha * v;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_round_trip_drops_zeros() {
        let x = [0.0, 1.5, 0.0, -2.0];
        let s = SparseVector::from_dense(&x);
        assert_eq!(s.nnz(), 2);
        assert_eq!(s.to_dense(), x.to_vec());
        assert_eq!(s.dot_dense(&[1.0, 2.0, 3.0, 4.0]), 3.0 - 8.0);
    }
}
