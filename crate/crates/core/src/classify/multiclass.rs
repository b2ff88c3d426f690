use super::{ClassifyError, SparseVector, SvmModel, SvmParams};

/// One-vs-rest ensemble; `labels` are ascending and parallel to `models`.
#[derive(Debug, Clone, PartialEq)]
pub struct MulticlassModel {
    labels: Vec<u32>,
    models: Vec<SvmModel>,
}

impl MulticlassModel {
    pub fn new(mut pairs: Vec<(u32, SvmModel)>) -> Result<Self, ClassifyError> {
        if pairs.len() < 2 {
            return Err(ClassifyError::DegenerateTraining);
        }
        pairs.sort_by_key(|(l, _)| *l);
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(ClassifyError::Config("duplicate class label".into()));
        }
        let dim = pairs[0].1.dim();
        if let Some((_, m)) = pairs.iter().find(|(_, m)| m.dim() != dim) {
            return Err(ClassifyError::Shape {
                expected: dim,
                found: m.dim(),
            });
        }
        let (labels, models) = pairs.into_iter().unzip();
        Ok(Self { labels, models })
    }

    /// Trains one binary model per distinct label, that class against all
    /// others, each with the same parameters.
    pub fn train(
        samples: &[SparseVector],
        labels: &[u32],
        params: &SvmParams,
    ) -> Result<Self, ClassifyError> {
        let mut classes = labels.to_vec();
        classes.sort_unstable();
        classes.dedup();
        if classes.len() < 2 {
            return Err(ClassifyError::DegenerateTraining);
        }
        let mut pairs = Vec::with_capacity(classes.len());
        for &c in &classes {
            let y: Vec<i8> = labels
                .iter()
                .map(|&l| if l == c { 1 } else { -1 })
                .collect();
            let (m, _) = SvmModel::train(samples, &y, params)?;
            pairs.push((c, m));
        }
        Self::new(pairs)
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn models(&self) -> &[SvmModel] {
        &self.models
    }

    pub fn dim(&self) -> usize {
        self.models[0].dim()
    }

    pub fn scores(&self, x: &SparseVector) -> Result<Vec<f64>, ClassifyError> {
        self.models.iter().map(|m| m.score(x)).collect()
    }

    /// Label with the highest raw score; the lowest label wins ties.
    pub fn predict(&self, x: &SparseVector) -> Result<u32, ClassifyError> {
        Ok(self.labels[argmax(&self.scores(x)?)])
    }
}

/// First index of the maximum.
pub(crate) fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ties_go_to_lowest_label() {
        let m = |b| SvmModel::from_parts(vec![0.0, 0.0], b, 1.0);
        let mc = MulticlassModel::new(vec![(7, m(0.5)), (3, m(0.5)), (9, m(0.1))]).unwrap();
        assert_eq!(mc.labels(), &[3, 7, 9]);
        assert_eq!(mc.predict(&SparseVector::zeros(2)).unwrap(), 3);
    }

    #[test]
    fn three_class_toy() {
        let pts = [
            (vec![1.0, 0.0, 0.0], 0),
            (vec![0.9, 0.1, 0.0], 0),
            (vec![0.0, 1.0, 0.0], 1),
            (vec![0.1, 0.9, 0.0], 1),
            (vec![0.0, 0.0, 1.0], 2),
            (vec![0.0, 0.1, 0.9], 2),
        ];
        let xs: Vec<_> = pts
            .iter()
            .map(|(x, _)| SparseVector::from_dense(x))
            .collect();
        let ys: Vec<u32> = pts.iter().map(|(_, y)| *y).collect();
        let mc = MulticlassModel::train(
            &xs,
            &ys,
            &SvmParams {
                c: 10.0,
                epochs: 200,
                seed: 1,
            },
        )
        .unwrap();
        for (x, y) in xs.iter().zip(&ys) {
            assert_eq!(mc.predict(x).unwrap(), *y);
        }
    }
}
