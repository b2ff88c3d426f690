use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::DartError;

/// Log-polar lattice dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridParams {
    pub n_rings: usize,
    pub n_wedges: usize,
    pub r_min: f64,
    pub r_max: f64,
}

impl Default for GridParams {
    fn default() -> Self {
        Self {
            n_rings: 7,
            n_wedges: 12,
            r_min: 2.0,
            r_max: 10.0,
        }
    }
}

impl GridParams {
    pub fn dim(&self) -> usize {
        self.n_rings * self.n_wedges
    }

    pub fn validate(&self) -> Result<(), DartError> {
        if self.n_rings < 2 {
            return Err(DartError::Config(format!("n_rings = {} < 2", self.n_rings)));
        }
        if self.n_wedges < 4 {
            return Err(DartError::Config(format!(
                "n_wedges = {} < 4",
                self.n_wedges
            )));
        }
        if self.n_rings * self.n_wedges > u16::MAX as usize {
            return Err(DartError::Config("too many bins".into()));
        }
        if !(self.r_min > 0.0 && self.r_min < self.r_max && self.r_max.is_finite()) {
            return Err(DartError::Config(format!(
                "need 0 < r_min < r_max, got r_min = {}, r_max = {}",
                self.r_min, self.r_max
            )));
        }
        if self.r_max > 1000.0 {
            return Err(DartError::Config("r_max too large".into()));
        }
        Ok(())
    }
}

/// A `(bin, weight)` contribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinWeight {
    pub bin: usize,
    pub weight: f64,
}

/// Up to four bin contributions for one offset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weights {
    bins: [u16; 4],
    weights: [f64; 4],
    len: u8,
}

impl Weights {
    fn single(bin: usize) -> Self {
        Self {
            bins: [bin as u16, 0, 0, 0],
            weights: [1.0, 0.0, 0.0, 0.0],
            len: 1,
        }
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = BinWeight> + '_ {
        (0..self.len as usize).map(|k| BinWeight {
            bin: self.bins[k] as usize,
            weight: self.weights[k],
        })
    }

    pub fn sum(&self) -> f64 {
        self.weights[..self.len as usize].iter().sum()
    }
}

/// Precomputed contribution of one integer pixel offset.
#[derive(Debug, Clone, Copy)]
pub struct LutEntry {
    pub dx: i16,
    pub dy: i16,
    pub weights: Weights,
}

/// Ring radii, bin midpoints and the integer-offset interpolation table.
#[derive(Debug, Clone)]
pub struct LogPolarGrid {
    params: GridParams,
    ring_radii: Vec<f64>,
    ring_mid: Vec<f64>,
    wedge_mid: Vec<f64>,
    theta_step: f64,
    lut: Vec<LutEntry>,
}

/// Polar coordinates of an offset, with the angle in `[0, 2π)`.
pub fn cart_to_polar(dx: f64, dy: f64) -> Result<(f64, f64), DartError> {
    if dx == 0.0 && dy == 0.0 {
        return Err(DartError::CenterEvent);
    }
    let r = dx.hypot(dy);
    // atan2 lands in (-π, π]; shift the lower half up.
    let mut theta = dy.atan2(dx);
    if theta < 0.0 {
        theta += TAU;
    }
    if theta >= TAU {
        theta -= TAU;
    }
    Ok((r, theta))
}

impl LogPolarGrid {
    pub fn new(params: GridParams) -> Result<Self, DartError> {
        params.validate()?;
        let n_r = params.n_rings;
        let n_w = params.n_wedges;
        let ratio = (params.r_max / params.r_min).ln();
        // Geometric rings with the first at r_min and the last at r_max.
        let ring_radii: Vec<f64> = (1..=n_r)
            .map(|q| params.r_min * ((q - 1) as f64 * ratio / (n_r - 1) as f64).exp())
            .collect();
        let mut ring_mid = Vec::with_capacity(n_r);
        let mut inner = 0.0;
        for &outer in &ring_radii {
            ring_mid.push((inner + outer) / 2.0);
            inner = outer;
        }
        let theta_step = TAU / n_w as f64;
        let wedge_mid = (0..n_w).map(|p| (p as f64 + 0.5) * theta_step).collect();
        let mut grid = Self {
            params,
            ring_radii,
            ring_mid,
            wedge_mid,
            theta_step,
            lut: Vec::new(),
        };
        grid.lut = grid.build_lut();
        Ok(grid)
    }

    fn build_lut(&self) -> Vec<LutEntry> {
        let reach = self.params.r_max.floor() as i32;
        let limit = self.params.r_max * self.params.r_max * (1.0 + 1e-12);
        let mut lut = Vec::new();
        for dy in -reach..=reach {
            for dx in -reach..=reach {
                let d2 = (dx * dx + dy * dy) as f64;
                if d2 == 0.0 || d2 > limit {
                    continue;
                }
                let (r, theta) = cart_to_polar(dx as f64, dy as f64).expect("nonzero offset");
                let weights = self
                    .interp_weights(r.min(self.params.r_max), theta)
                    .expect("offset within r_max");
                lut.push(LutEntry {
                    dx: dx as i16,
                    dy: dy as i16,
                    weights,
                });
            }
        }
        lut
    }

    pub fn params(&self) -> &GridParams {
        &self.params
    }

    pub fn n_rings(&self) -> usize {
        self.params.n_rings
    }

    pub fn n_wedges(&self) -> usize {
        self.params.n_wedges
    }

    pub fn dim(&self) -> usize {
        self.params.dim()
    }

    /// Outer radius of each ring; the implicit inner radius of ring 0 is 0.
    pub fn ring_radii(&self) -> &[f64] {
        &self.ring_radii
    }

    pub fn ring_midpoints(&self) -> &[f64] {
        &self.ring_mid
    }

    pub fn wedge_midpoints(&self) -> &[f64] {
        &self.wedge_mid
    }

    pub fn theta_step(&self) -> f64 {
        self.theta_step
    }

    pub fn lut(&self) -> &[LutEntry] {
        &self.lut
    }

    pub fn bin(&self, ring: usize, wedge: usize) -> usize {
        ring * self.params.n_wedges + wedge
    }

    /// Wedge whose angular span contains `theta`. Angles sitting on a wedge
    /// boundary go to the counter-clockwise side so that quarter-turn
    /// rotations map boundaries consistently.
    fn containing_wedge(&self, theta: f64) -> usize {
        let w = (theta / self.theta_step + 1e-9).floor() as isize;
        w.rem_euclid(self.params.n_wedges as isize) as usize
    }

    /// Bilinear weights of a point over the four surrounding bin midpoints,
    /// wrapping in angle. Points outside the radial span of the midpoints
    /// go entirely to the nearest bin.
    pub fn interp_weights(&self, r: f64, theta: f64) -> Result<Weights, DartError> {
        if !(r > 0.0) {
            return Err(DartError::CenterEvent);
        }
        if r > self.params.r_max * (1.0 + 1e-12) {
            return Err(DartError::OutOfRange {
                r,
                r_max: self.params.r_max,
            });
        }
        let n_r = self.params.n_rings;
        let n_w = self.params.n_wedges;
        let theta = theta.rem_euclid(TAU);
        let first = self.ring_mid[0];
        let last = self.ring_mid[n_r - 1];
        if r < first {
            return Ok(Weights::single(self.bin(0, self.containing_wedge(theta))));
        }
        if r > last {
            return Ok(Weights::single(
                self.bin(n_r - 1, self.containing_wedge(theta)),
            ));
        }
        let q = self.ring_mid[..n_r - 1]
            .partition_point(|&m| m <= r)
            .saturating_sub(1);
        let q2 = q + 1;

        // Angle measured from the first wedge midpoint, so a point past the
        // last midpoint interpolates between wedges n_w - 1 and 0.
        let mut u = theta - self.theta_step / 2.0;
        if u < 0.0 {
            u += TAU;
        }
        let p = ((u / self.theta_step).floor() as usize).min(n_w - 1);
        let p2 = (p + 1) % n_w;
        let th_p = self.wedge_mid[p];
        let th_p2 = th_p + self.theta_step;
        let th_i = self.theta_step / 2.0 + u;

        let (rq, rq2) = (self.ring_mid[q], self.ring_mid[q2]);
        let a = [
            [1.0, rq, th_p, rq * th_p],
            [1.0, rq2, th_p, rq2 * th_p],
            [1.0, rq, th_p2, rq * th_p2],
            [1.0, rq2, th_p2, rq2 * th_p2],
        ];
        // b = (A^-1)^T v, i.e. A^T b = v.
        let mut at = [[0.0; 4]; 4];
        for (i, row) in a.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                at[j][i] = v;
            }
        }
        let v = [1.0, r, th_i, r * th_i];
        match solve4(at, v) {
            Some(b) => Ok(Weights {
                bins: [
                    self.bin(q, p) as u16,
                    self.bin(q2, p) as u16,
                    self.bin(q, p2) as u16,
                    self.bin(q2, p2) as u16,
                ],
                weights: b,
                len: 4,
            }),
            None => {
                let ring = if r - rq < rq2 - r { q } else { q2 };
                Ok(Weights::single(
                    self.bin(ring, self.containing_wedge(theta)),
                ))
            }
        }
    }

    /// Convenience wrapper: weights for a Cartesian offset.
    pub fn offset_weights(&self, dx: f64, dy: f64) -> Result<Weights, DartError> {
        let (r, theta) = cart_to_polar(dx, dy)?;
        self.interp_weights(r, theta)
    }
}

/// Gaussian elimination with partial pivoting. `None` on a (near) singular
/// matrix.
fn solve4(mut m: [[f64; 4]; 4], mut v: [f64; 4]) -> Option<[f64; 4]> {
    let scale = m
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |acc, x| acc.max(x.abs()));
    for col in 0..4 {
        let pivot = (col..4)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .unwrap();
        if m[pivot][col].abs() <= 1e-12 * scale {
            return None;
        }
        m.swap(col, pivot);
        v.swap(col, pivot);
        for row in col + 1..4 {
            let f = m[row][col] / m[col][col];
            for k in col..4 {
                m[row][k] -= f * m[col][k];
            }
            v[row] -= f * v[col];
        }
    }
    let mut x = [0.0; 4];
    for row in (0..4).rev() {
        let s: f64 = (row + 1..4).map(|k| m[row][k] * x[k]).sum();
        x[row] = (v[row] - s) / m[row][row];
    }
    Some(x)
}
