//! Independent reference implementations shared by the property and
//! acceptance suites. Each one recomputes its result from first principles
//! and never calls into the code it checks.
#![allow(dead_code)]

use std::f64::consts::TAU;

use dart_core::dart::GridParams;
use dart_core::Event;

/// Bilinear weights computed directly from the ring and wedge geometry,
/// without the grid's lookup table or linear solve.
pub fn oracle_weights(p: &GridParams, r: f64, theta: f64) -> Vec<(usize, f64)> {
    let n_r = p.n_rings;
    let n_w = p.n_wedges;
    let k = (p.r_max / p.r_min).powf(1.0 / (n_r - 1) as f64);
    let rho: Vec<f64> = (0..n_r).map(|q| p.r_min * k.powi(q as i32)).collect();
    let mid: Vec<f64> = (0..n_r)
        .map(|q| {
            if q == 0 {
                rho[0] / 2.0
            } else {
                (rho[q - 1] + rho[q]) / 2.0
            }
        })
        .collect();
    let step = TAU / n_w as f64;
    let theta = theta.rem_euclid(TAU);
    let containing = ((theta / step + 1e-9).floor() as usize) % n_w;
    if r < mid[0] {
        return vec![(containing, 1.0)];
    }
    if r > mid[n_r - 1] {
        return vec![((n_r - 1) * n_w + containing, 1.0)];
    }
    let mut q = 0;
    while q + 2 < n_r && mid[q + 1] <= r {
        q += 1;
    }
    let a = (r - mid[q]) / (mid[q + 1] - mid[q]);
    let u = (theta - step / 2.0).rem_euclid(TAU);
    let w0 = ((u / step).floor() as usize).min(n_w - 1);
    let w1 = (w0 + 1) % n_w;
    let b = (u - w0 as f64 * step) / step;
    vec![
        (q * n_w + w0, (1.0 - a) * (1.0 - b)),
        ((q + 1) * n_w + w0, a * (1.0 - b)),
        (q * n_w + w1, (1.0 - a) * b),
        ((q + 1) * n_w + w1, a * b),
    ]
}

/// Descriptor of the last event by walking the remembered events.
pub fn oracle_descriptor(p: &GridParams, history: &[(u16, u16)], capacity: usize) -> Vec<f64> {
    let mut out = vec![0.0; p.dim()];
    let (cx, cy) = *history.last().unwrap();
    let start = history.len().saturating_sub(capacity);
    for &(x, y) in &history[start..] {
        if (x, y) == (cx, cy) {
            continue;
        }
        let dx = x as f64 - cx as f64;
        let dy = y as f64 - cy as f64;
        let r = dx.hypot(dy);
        if r > p.r_max * (1.0 + 1e-12) {
            continue;
        }
        for (bin, w) in oracle_weights(p, r.min(p.r_max), dy.atan2(dx)) {
            out[bin] += w;
        }
    }
    let total: f64 = out.iter().sum();
    if total > 0.0 {
        out.iter_mut().for_each(|v| *v /= total);
    }
    out
}

/// Refractory stage by scanning every earlier kept event.
pub fn refractory_oracle(events: &[Event], theta_ref: u64) -> Vec<bool> {
    let mut keep = vec![false; events.len()];
    for i in 0..events.len() {
        let e = events[i];
        let blocked = (0..i).any(|j| {
            keep[j] && events[j].x == e.x && events[j].y == e.y && e.t - events[j].t <= theta_ref
        });
        keep[i] = !blocked;
    }
    keep
}

/// Noise stage by scanning every earlier event presented to it.
pub fn noise_oracle(events: &[Event], theta_noise: u64) -> Vec<bool> {
    (0..events.len())
        .map(|i| {
            let e = events[i];
            (0..i).any(|j| {
                let o = events[j];
                let dx = (o.x as i32 - e.x as i32).abs();
                let dy = (o.y as i32 - e.y as i32).abs();
                dx <= 1 && dy <= 1 && (dx, dy) != (0, 0) && e.t - o.t < theta_noise
            })
        })
        .collect()
}

/// Exact additive χ² kernel.
pub fn chi2(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(&a, &b)| {
            if a + b > 0.0 {
                2.0 * a * b / (a + b)
            } else {
                0.0
            }
        })
        .sum()
}
