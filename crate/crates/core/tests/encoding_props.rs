use std::f64::consts::PI;

use dart_core::encoding::io::{read_codebook, write_codebook};
use dart_core::encoding::{
    bow_pool, kernel_map, kernel_map_sparse, kmeans_train, spm_pool, Codebook, ForestParams,
    KMeansParams, KdForest, KernelMapParams, SpmParams,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod common;
use common::chi2;

fn random_rows(n: usize, d: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| (0..d).map(|_| rng.gen::<f64>()).collect())
        .collect()
}

fn l1_histogram(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..d).map(|_| rng.gen::<f64>()).collect();
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
    v
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Closed form of the truncated spectrum sampled at period `l`.
fn approx_scalar_kernel(x: f64, y: f64, m: usize, l: f64) -> f64 {
    if x == 0.0 || y == 0.0 {
        return 0.0;
    }
    let kappa = |lambda: f64| 1.0 / (PI * lambda).cosh();
    let mut s = l * kappa(0.0);
    for j in 1..=m {
        let lj = j as f64 * l;
        s += 2.0 * l * kappa(lj) * (lj * (x / y).ln()).cos();
    }
    (x * y).sqrt() * s
}

#[test]
fn kmeans_inertia_never_increases_and_is_reproducible() {
    let data = random_rows(400, 6, 3);
    let params = KMeansParams {
        k: 12,
        max_iters: 40,
        seed: 9,
    };
    let fit = kmeans_train(&data, &params).unwrap();
    for w in fit.inertia.windows(2) {
        assert!(w[1] <= w[0] * (1.0 + 1e-12), "{} then {}", w[0], w[1]);
    }
    let again = kmeans_train(&data, &params).unwrap();
    assert_eq!(fit.codebook, again.codebook);
    assert_eq!(fit.assignments, again.assignments);
    // every point sits with its nearest centroid
    for (x, &a) in data.iter().zip(&fit.assignments) {
        assert_eq!(fit.codebook.nearest(x).0, a);
    }
}

#[test]
fn kmeans_duplicates_fill_every_cluster() {
    let mut data = vec![vec![0.0, 0.0]; 30];
    data.extend(vec![vec![1.0, 1.0]; 30]);
    data.push(vec![5.0, 5.0]);
    let fit = kmeans_train(
        &data,
        &KMeansParams {
            k: 3,
            max_iters: 20,
            seed: 1,
        },
    )
    .unwrap();
    let mut sizes = [0; 3];
    for &a in &fit.assignments {
        sizes[a] += 1;
    }
    assert!(sizes.iter().all(|&s| s > 0));
}

#[test]
fn forest_recall_monotone_in_checks() {
    let cb = Codebook::from_rows(&random_rows(300, 16, 5)).unwrap();
    let queries = random_rows(300, 16, 6);
    let exact: Vec<usize> = queries.iter().map(|q| cb.nearest(q).0).collect();
    let mut prev_hits: Option<Vec<bool>> = None;
    for checks in [1, 2, 5, 15, 40, 100, 300] {
        let forest = KdForest::build(
            &cb,
            ForestParams {
                n_trees: 4,
                max_checks: checks,
                seed: 2,
            },
        );
        let hits: Vec<bool> = queries
            .iter()
            .zip(&exact)
            .map(|(q, &e)| {
                let (res, stats) = forest.search(&cb, q, 1);
                assert!(stats.checks <= checks.max(1));
                res[0].0 == e
            })
            .collect();
        if let Some(prev) = &prev_hits {
            for (a, b) in prev.iter().zip(&hits) {
                assert!(
                    !a || *b,
                    "a query found at fewer checks was lost at {checks}"
                );
            }
        }
        if checks >= 300 {
            assert!(hits.iter().all(|&h| h));
        }
        prev_hits = Some(hits);
    }
}

#[test]
fn codebook_round_trip_rebuilds_forest() {
    let cb = Codebook::from_rows(&random_rows(20, 4, 8)).unwrap();
    let fp = ForestParams {
        n_trees: 3,
        max_checks: 7,
        seed: 11,
    };
    let bytes = write_codebook(&cb, Some(&fp));
    let (back, forest) = read_codebook(&bytes).unwrap();
    assert_eq!(back, cb.to_f32_precision());
    let forest = forest.unwrap();
    assert_eq!(forest.params(), fp);
    let direct = KdForest::build(&back, fp);
    for q in random_rows(50, 4, 12) {
        assert_eq!(forest.nearest(&back, &q), direct.nearest(&back, &q));
    }
    assert!(read_codebook(&bytes[..bytes.len() - 3]).is_err());
}

#[test]
fn kernel_map_mean_relative_error_within_ten_percent() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let params = KernelMapParams::default();
    let mut total = 0.0;
    for _ in 0..100 {
        let x = l1_histogram(&mut rng, 50);
        let y = l1_histogram(&mut rng, 50);
        let approx = dot(
            &kernel_map(&x, &params).unwrap(),
            &kernel_map(&y, &params).unwrap(),
        );
        let exact = chi2(&x, &y);
        total += (approx - exact).abs() / exact;
    }
    assert!(
        total / 100.0 <= 0.10,
        "mean relative error {}",
        total / 100.0
    );
}

proptest! {
    #[test]
    fn kernel_map_inner_product_is_closed_form(
        x in proptest::collection::vec(0.0f64..1.0, 1..20),
        y in proptest::collection::vec(0.0f64..1.0, 1..20),
        m in 1usize..4,
        l in 0.2f64..1.0,
    ) {
        let n = x.len().min(y.len());
        let (x, y) = (&x[..n], &y[..n]);
        let params = KernelMapParams { order: m, period: l };
        let px = kernel_map(x, &params).unwrap();
        let py = kernel_map(y, &params).unwrap();
        let expected: f64 = x.iter().zip(y).map(|(&a, &b)| approx_scalar_kernel(a, b, m, l)).sum();
        prop_assert!((dot(&px, &py) - expected).abs() <= 1e-9);
        prop_assert!((dot(&px, &py) - dot(&py, &px)).abs() <= 1e-12);
    }

    #[test]
    fn sparse_kernel_map_matches_dense(x in proptest::collection::vec(prop_oneof![Just(0.0), 0.0f64..1.0], 1..30)) {
        let params = KernelMapParams::default();
        let dense = kernel_map(&x, &params).unwrap();
        let sparse = kernel_map_sparse(&x.iter().copied().enumerate().collect::<Vec<_>>(), &params).unwrap();
        let mut rebuilt = vec![0.0; dense.len()];
        for (i, v) in sparse {
            rebuilt[i] = v;
        }
        prop_assert_eq!(rebuilt, dense);
    }

    #[test]
    fn bow_matches_counting_oracle(words in proptest::collection::vec(0usize..7, 0..100)) {
        let h = bow_pool(&words, 7);
        for k in 0..7 {
            let c = words.iter().filter(|&&w| w == k).count() as f64;
            let expected = if words.is_empty() { 0.0 } else { c / words.len() as f64 };
            prop_assert!((h.values[k] - expected).abs() <= 1e-12);
        }
    }

    #[test]
    fn spm_matches_cell_oracle(
        items in proptest::collection::vec((0u16..30, 0u16..20, 0usize..5), 1..80),
        levels in proptest::collection::vec(1usize..5, 1..4),
    ) {
        let (w, h, k) = (30u16, 20u16, 5usize);
        let params = SpmParams { levels: levels.clone() };
        let v = spm_pool(&items, w, h, k, &params).unwrap();
        // per-cell histograms, each L1-normalized, then one global L1 pass
        let mut expected = Vec::new();
        for &g in &levels {
            for cy in 0..g {
                for cx in 0..g {
                    let inside: Vec<usize> = items
                        .iter()
                        .filter(|&&(x, y, _)| (x as usize * g) / w as usize == cx && (y as usize * g) / h as usize == cy)
                        .map(|&(_, _, word)| word)
                        .collect();
                    expected.extend(bow_pool(&inside, k).values);
                }
            }
        }
        let s: f64 = expected.iter().sum();
        expected.iter_mut().for_each(|x| *x /= s);
        prop_assert_eq!(v.values.len(), expected.len());
        for (a, b) in v.values.iter().zip(&expected) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }
}
