use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::EncodingError;

/// Finite feature map whose inner product approximates the additive χ²
/// kernel `k(x, y) = Σ 2 x_i y_i / (x_i + y_i)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KernelMapParams {
    /// Number of frequency pairs; each component expands to `2m + 1` values.
    pub order: usize,
    /// Sampling period of the kernel spectrum.
    pub period: f64,
}

impl Default for KernelMapParams {
    fn default() -> Self {
        Self {
            order: 1,
            period: 0.65,
        }
    }
}

/// Spectrum of the χ² kernel.
fn kappa(lambda: f64) -> f64 {
    1.0 / (PI * lambda).cosh()
}

impl KernelMapParams {
    pub fn validate(&self) -> Result<(), EncodingError> {
        if self.order == 0 {
            return Err(EncodingError::Config(
                "kernel map order must be at least 1".into(),
            ));
        }
        if !(self.period.is_finite() && self.period > 0.0) {
            return Err(EncodingError::Config(format!(
                "sampling period must be positive, got {}",
                self.period
            )));
        }
        Ok(())
    }

    pub fn expansion(&self) -> usize {
        2 * self.order + 1
    }

    pub fn output_dim(&self, d: usize) -> usize {
        d * self.expansion()
    }

    fn coefficients(&self) -> Vec<f64> {
        let l = self.period;
        std::iter::once(l * kappa(0.0))
            .chain((1..=self.order).map(|j| 2.0 * l * kappa(j as f64 * l)))
            .collect()
    }

    /// Expansion of one scalar into `out` (length `2m + 1`).
    fn map_scalar(&self, coef: &[f64], c: f64, out: &mut [f64]) {
        if c == 0.0 {
            out.iter_mut().for_each(|v| *v = 0.0);
            return;
        }
        let log_c = c.ln();
        out[0] = (c * coef[0]).sqrt();
        for j in 1..=self.order {
            let amp = (c * coef[j]).sqrt();
            let phase = j as f64 * self.period * log_c;
            out[2 * j - 1] = amp * phase.cos();
            out[2 * j] = amp * phase.sin();
        }
    }
}

pub fn kernel_map(x: &[f64], params: &KernelMapParams) -> Result<Vec<f64>, EncodingError> {
    let mut out = vec![0.0; params.output_dim(x.len())];
    kernel_map_into(x, params, &mut out)?;
    Ok(out)
}

/// Component `i` of `x` occupies `out[i*(2m+1) .. (i+1)*(2m+1)]`.
pub fn kernel_map_into(
    x: &[f64],
    params: &KernelMapParams,
    out: &mut [f64],
) -> Result<(), EncodingError> {
    params.validate()?;
    let e = params.expansion();
    if out.len() != x.len() * e {
        return Err(EncodingError::Dimension {
            expected: x.len() * e,
            found: out.len(),
        });
    }
    check_domain(x.iter().copied().enumerate())?;
    let coef = params.coefficients();
    for (i, &c) in x.iter().enumerate() {
        params.map_scalar(&coef, c, &mut out[i * e..(i + 1) * e]);
    }
    Ok(())
}

/// Sparse form: non-zero `(index, value)` components map to
/// `(index * (2m+1) + j, Ψ_j)` entries, sorted by index.
pub fn kernel_map_sparse(
    x: &[(usize, f64)],
    params: &KernelMapParams,
) -> Result<Vec<(usize, f64)>, EncodingError> {
    params.validate()?;
    check_domain(x.iter().copied())?;
    let e = params.expansion();
    let coef = params.coefficients();
    let mut sorted: Vec<(usize, f64)> = x.iter().copied().filter(|&(_, v)| v != 0.0).collect();
    sorted.sort_by_key(|&(i, _)| i);
    let mut out = Vec::with_capacity(sorted.len() * e);
    let mut buf = vec![0.0; e];
    for (i, c) in sorted {
        params.map_scalar(&coef, c, &mut buf);
        out.extend(buf.iter().enumerate().map(|(j, &v)| (i * e + j, v)));
    }
    Ok(out)
}

fn check_domain(it: impl Iterator<Item = (usize, f64)>) -> Result<(), EncodingError> {
    for (index, value) in it {
        if !(value >= 0.0) || !value.is_finite() {
            return Err(EncodingError::Domain { index, value });
        }
    }
    Ok(())
}
