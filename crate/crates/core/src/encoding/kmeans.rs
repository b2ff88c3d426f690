use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{dist2, Codebook, EncodingError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KMeansParams {
    pub k: usize,
    pub max_iters: usize,
    pub seed: u64,
}

impl Default for KMeansParams {
    fn default() -> Self {
        Self {
            k: 300,
            max_iters: 50,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct KMeansFit {
    pub codebook: Codebook,
    /// Final assignment of each training point.
    pub assignments: Vec<usize>,
    /// Inertia after every assignment pass, first entry from the seeding.
    pub inertia: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// k-means++ seeding followed by Lloyd iterations until the assignment stops
/// changing or `max_iters` update steps have run.
pub fn kmeans_train<X: AsRef<[f64]>>(
    data: &[X],
    params: &KMeansParams,
) -> Result<KMeansFit, EncodingError> {
    let n = data.len();
    let k = params.k;
    if k < 2 {
        return Err(EncodingError::Config(format!(
            "K must be at least 2, got {k}"
        )));
    }
    if n < k {
        return Err(EncodingError::Config(format!(
            "{n} training points cannot seed {k} clusters"
        )));
    }
    let d = data[0].as_ref().len();
    if d == 0 {
        return Err(EncodingError::Config("zero-dimensional data".into()));
    }
    for x in data {
        if x.as_ref().len() != d {
            return Err(EncodingError::Dimension {
                expected: d,
                found: x.as_ref().len(),
            });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut centroids = seed_plus_plus(data, k, d, &mut rng);

    let mut assign = vec![usize::MAX; n];
    let mut dists = vec![0.0; n];
    let mut inertia = Vec::new();
    let mut iterations = 0;
    let mut converged = false;

    loop {
        let changed = assign_all(data, &centroids, d, &mut assign, &mut dists);
        inertia.push(dists.iter().sum());
        if !changed {
            converged = true;
            break;
        }
        if iterations == params.max_iters {
            break;
        }
        update(data, &mut centroids, d, &assign, &dists);
        iterations += 1;
    }

    Ok(KMeansFit {
        codebook: Codebook::new(d, centroids)?,
        assignments: assign,
        inertia,
        iterations,
        converged,
    })
}

fn seed_plus_plus<X: AsRef<[f64]>>(
    data: &[X],
    k: usize,
    d: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    let n = data.len();
    let mut centroids = Vec::with_capacity(k * d);
    let first = rng.gen_range(0..n);
    centroids.extend_from_slice(data[first].as_ref());
    let mut best: Vec<f64> = data
        .iter()
        .map(|x| dist2(x.as_ref(), data[first].as_ref()))
        .collect();
    for _ in 1..k {
        let total: f64 = best.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.gen::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &w) in best.iter().enumerate() {
                if w > 0.0 && target < w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            // rounding can exhaust the loop; fall back to the last positive weight
            if best[chosen] == 0.0 {
                chosen = best.iter().rposition(|&w| w > 0.0).unwrap_or(chosen);
            }
            chosen
        } else {
            rng.gen_range(0..n)
        };
        let c = data[pick].as_ref();
        centroids.extend_from_slice(c);
        for (b, x) in best.iter_mut().zip(data) {
            let dd = dist2(x.as_ref(), c);
            if dd < *b {
                *b = dd;
            }
        }
    }
    centroids
}

/// Nearest-centroid assignment, lowest index on ties. Returns whether any
/// assignment changed.
fn assign_all<X: AsRef<[f64]>>(
    data: &[X],
    centroids: &[f64],
    d: usize,
    assign: &mut [usize],
    dists: &mut [f64],
) -> bool {
    let mut changed = false;
    for (i, x) in data.iter().enumerate() {
        let x = x.as_ref();
        let mut best = (0, f64::INFINITY);
        for (j, c) in centroids.chunks_exact(d).enumerate() {
            let dd = dist2(x, c);
            if dd < best.1 {
                best = (j, dd);
            }
        }
        if assign[i] != best.0 {
            assign[i] = best.0;
            changed = true;
        }
        dists[i] = best.1;
    }
    changed
}

/// Moves every centroid to its members' mean. An empty cluster takes the
/// point farthest from its own centroid that has not already been used.
fn update<X: AsRef<[f64]>>(
    data: &[X],
    centroids: &mut [f64],
    d: usize,
    assign: &[usize],
    dists: &[f64],
) {
    let k = centroids.len() / d;
    let mut sums = vec![0.0; k * d];
    let mut counts = vec![0usize; k];
    for (x, &a) in data.iter().zip(assign) {
        counts[a] += 1;
        for (s, v) in sums[a * d..(a + 1) * d].iter_mut().zip(x.as_ref()) {
            *s += v;
        }
    }
    let mut used = vec![false; data.len()];
    for j in 0..k {
        let c = &mut centroids[j * d..(j + 1) * d];
        if counts[j] > 0 {
            let inv = 1.0 / counts[j] as f64;
            for (cv, s) in c.iter_mut().zip(&sums[j * d..(j + 1) * d]) {
                *cv = s * inv;
            }
        } else {
            let mut far = None;
            for (i, &dd) in dists.iter().enumerate() {
                if !used[i] && far.is_none_or(|(_, best)| dd > best) {
                    far = Some((i, dd));
                }
            }
            if let Some((i, _)) = far {
                used[i] = true;
                c.copy_from_slice(data[i].as_ref());
            }
        }
    }
}
