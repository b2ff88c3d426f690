use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ClassifyError, SparseVector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SvmParams {
    /// Trade-off between margin and hinge loss; `λ = 1 / (C n)`.
    pub c: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            c: 1.0,
            epochs: 50,
            seed: 0,
        }
    }
}

impl SvmParams {
    pub fn validate(&self) -> Result<(), ClassifyError> {
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(ClassifyError::Config(format!(
                "C must be positive, got {}",
                self.c
            )));
        }
        if self.epochs == 0 {
            return Err(ClassifyError::Config("epochs must be positive".into()));
        }
        Ok(())
    }
}

/// Linear decision function `wᵀψ + b` with the running statistics of the
/// scores it has accepted.
#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    pub(crate) w: Vec<f64>,
    pub(crate) b: f64,
    pub(crate) lambda: f64,
    /// Step size of the last batch iteration.
    pub(crate) final_step: f64,
    pub(crate) score_sum: f64,
    pub(crate) score_count: u64,
}

/// Regularized objective after every epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub objective: Vec<f64>,
    pub hinge: Vec<f64>,
}

impl SvmModel {
    pub fn from_parts(w: Vec<f64>, b: f64, lambda: f64) -> Self {
        Self {
            w,
            b,
            lambda,
            final_step: 1.0,
            score_sum: 0.0,
            score_count: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.w.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    pub fn bias(&self) -> f64 {
        self.b
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn final_step(&self) -> f64 {
        self.final_step
    }

    /// Online step size used during tracking.
    pub fn online_rate(&self) -> f64 {
        0.01 * self.final_step
    }

    /// Stochastic subgradient descent on `λ/2 (‖w‖² + b²) + mean hinge`
    /// with step `1/(λt)` over per-epoch seeded shuffles. The bias is an
    /// ordinary weight on a constant feature, so flipping every label
    /// negates the solution exactly.
    pub fn train(
        samples: &[SparseVector],
        labels: &[i8],
        params: &SvmParams,
    ) -> Result<(Self, TrainReport), ClassifyError> {
        params.validate()?;
        assert_eq!(samples.len(), labels.len(), "one label per sample");
        let dim = match samples.first() {
            Some(s) => s.dim(),
            None => return Err(ClassifyError::DegenerateTraining),
        };
        for s in samples {
            if s.dim() != dim {
                return Err(ClassifyError::Shape {
                    expected: dim,
                    found: s.dim(),
                });
            }
        }
        if !(labels.contains(&1) && labels.contains(&-1))
            || labels.iter().any(|&y| y != 1 && y != -1)
        {
            return Err(ClassifyError::DegenerateTraining);
        }
        let n = samples.len();
        let lambda = 1.0 / (params.c * n as f64);

        // w = scale * v, bias = scale * vb
        let mut v = vec![0.0; dim];
        let mut vb = 0.0;
        let mut scale = 1.0;
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let mut order: Vec<usize> = (0..n).collect();
        let mut t = 0u64;
        let mut step = 0.0;
        let mut report = TrainReport {
            objective: Vec::with_capacity(params.epochs),
            hinge: Vec::with_capacity(params.epochs),
        };

        for _ in 0..params.epochs {
            order.shuffle(&mut rng);
            for &i in &order {
                t += 1;
                step = 1.0 / (lambda * t as f64);
                let y = labels[i] as f64;
                let x = &samples[i];
                let margin = y * scale * (x.dot_dense(&v) + vb);
                let shrink = 1.0 - step * lambda;
                if shrink <= 0.0 {
                    v.iter_mut().for_each(|e| *e = 0.0);
                    vb = 0.0;
                    scale = 1.0;
                } else {
                    scale *= shrink;
                }
                if margin < 1.0 {
                    let a = step * y / scale;
                    x.axpy_into(a, &mut v);
                    vb += a;
                }
                if scale < 1e-9 {
                    v.iter_mut().for_each(|e| *e *= scale);
                    vb *= scale;
                    scale = 1.0;
                }
            }
            let w: Vec<f64> = v.iter().map(|e| e * scale).collect();
            let b = vb * scale;
            let hinge = samples
                .iter()
                .zip(labels)
                .map(|(x, &y)| (1.0 - y as f64 * (x.dot_dense(&w) + b)).max(0.0))
                .sum::<f64>()
                / n as f64;
            let reg = 0.5 * lambda * (w.iter().map(|e| e * e).sum::<f64>() + b * b);
            report.hinge.push(hinge);
            report.objective.push(reg + hinge);
        }

        let model = Self {
            w: v.iter().map(|e| e * scale).collect(),
            b: vb * scale,
            lambda,
            final_step: step,
            score_sum: 0.0,
            score_count: 0,
        };
        Ok((model, report))
    }

    pub fn score(&self, x: &SparseVector) -> Result<f64, ClassifyError> {
        self.check(x.dim())?;
        Ok(x.dot_dense(&self.w) + self.b)
    }

    pub fn score_dense(&self, x: &[f64]) -> Result<f64, ClassifyError> {
        self.check(x.len())?;
        Ok(x.iter().zip(&self.w).map(|(a, b)| a * b).sum::<f64>() + self.b)
    }

    fn check(&self, found: usize) -> Result<(), ClassifyError> {
        if found != self.w.len() {
            return Err(ClassifyError::Shape {
                expected: self.w.len(),
                found,
            });
        }
        Ok(())
    }

    /// One hinge subgradient step at `(x, label)`: always shrinks by
    /// `1 - rate λ`, and moves toward the label when the margin is below 1.
    pub fn update_online(
        &mut self,
        x: &SparseVector,
        label: i8,
        rate: f64,
    ) -> Result<(), ClassifyError> {
        let s = self.score(x)?;
        let y = label as f64;
        let shrink = (1.0 - rate * self.lambda).max(0.0);
        self.w.iter_mut().for_each(|e| *e *= shrink);
        self.b *= shrink;
        if y * s < 1.0 {
            x.axpy_into(rate * y, &mut self.w);
            self.b += rate * y;
        }
        Ok(())
    }

    pub fn record_score(&mut self, s: f64) {
        self.score_sum += s;
        self.score_count += 1;
    }

    pub fn reset_scores(&mut self) {
        self.score_sum = 0.0;
        self.score_count = 0;
    }

    /// Mean of the recorded scores, `None` before the first.
    pub fn score_mean(&self) -> Option<f64> {
        (self.score_count > 0).then(|| self.score_sum / self.score_count as f64)
    }

    pub fn score_count(&self) -> u64 {
        self.score_count
    }
}
