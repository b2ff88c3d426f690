use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{dist2, Codebook};

/// Number of highest-variance dimensions a split dimension is drawn from.
const SPLIT_CANDIDATES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ForestParams {
    pub n_trees: usize,
    /// Upper bound on distinct centroid distance evaluations per query.
    pub max_checks: usize,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_trees: 4,
            max_checks: 15,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Leaf(Vec<u32>),
    Split {
        dim: u32,
        threshold: f64,
        left: u32,
        right: u32,
    },
}

#[derive(Debug, Clone, PartialEq)]
struct Tree {
    nodes: Vec<Node>,
}

/// Randomized kd-trees over a codebook, queried best-bin-first with one
/// priority queue shared by all trees.
#[derive(Debug, Clone, PartialEq)]
pub struct KdForest {
    params: ForestParams,
    k: usize,
    dim: usize,
    trees: Vec<Tree>,
}

/// Work done by one query.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub checks: usize,
    pub nodes_popped: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Branch {
    bound: f64,
    seq: u64,
    tree: u32,
    node: u32,
}

impl Eq for Branch {}

impl Ord for Branch {
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound
            .total_cmp(&other.bound)
            .then(self.seq.cmp(&other.seq))
    }
}

impl PartialOrd for Branch {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl KdForest {
    pub fn build(codebook: &Codebook, params: ForestParams) -> Self {
        let n_trees = params.n_trees.max(1);
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let trees = (0..n_trees)
            .map(|_| {
                let mut nodes = Vec::new();
                let idx: Vec<u32> = (0..codebook.k() as u32).collect();
                build_node(codebook, idx, &mut nodes, &mut rng);
                Tree { nodes }
            })
            .collect();
        Self {
            params: ForestParams { n_trees, ..params },
            k: codebook.k(),
            dim: codebook.dim(),
            trees,
        }
    }

    pub fn params(&self) -> ForestParams {
        self.params
    }

    pub fn with_max_checks(mut self, max_checks: usize) -> Self {
        self.params.max_checks = max_checks;
        self
    }

    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    /// Centroid indices held by each leaf of tree `t`.
    pub fn leaves(&self, t: usize) -> Vec<&[u32]> {
        self.trees[t]
            .nodes
            .iter()
            .filter_map(|n| match n {
                Node::Leaf(v) => Some(v.as_slice()),
                Node::Split { .. } => None,
            })
            .collect()
    }

    pub fn nearest(&self, codebook: &Codebook, x: &[f64]) -> usize {
        self.search(codebook, x, 1).0[0].0
    }

    /// Up to `k` approximate neighbours as `(index, squared distance)`,
    /// closest first with lower index breaking ties.
    pub fn knn(&self, codebook: &Codebook, x: &[f64], k: usize) -> Vec<(usize, f64)> {
        self.search(codebook, x, k).0
    }

    pub fn search(
        &self,
        codebook: &Codebook,
        x: &[f64],
        k: usize,
    ) -> (Vec<(usize, f64)>, SearchStats) {
        assert_eq!(codebook.k(), self.k, "forest built for another codebook");
        assert_eq!(x.len(), self.dim, "query dimension");
        let k = k.max(1);
        let mut best: Vec<(usize, f64)> = Vec::with_capacity(k + 1);
        let mut checked = vec![false; self.k];
        let mut stats = SearchStats::default();
        let mut heap = BinaryHeap::new();
        let mut seq = 0u64;
        for t in 0..self.trees.len() {
            heap.push(Reverse(Branch {
                bound: 0.0,
                seq,
                tree: t as u32,
                node: 0,
            }));
            seq += 1;
        }
        let budget = self.params.max_checks.max(1);
        while let Some(Reverse(br)) = heap.pop() {
            if stats.checks >= budget {
                break;
            }
            if best.len() == k && br.bound > best[k - 1].1 {
                continue;
            }
            stats.nodes_popped += 1;
            let nodes = &self.trees[br.tree as usize].nodes;
            let mut node = br.node;
            loop {
                match &nodes[node as usize] {
                    Node::Split {
                        dim,
                        threshold,
                        left,
                        right,
                    } => {
                        let diff = x[*dim as usize] - threshold;
                        let (near, far) = if diff < 0.0 {
                            (*left, *right)
                        } else {
                            (*right, *left)
                        };
                        heap.push(Reverse(Branch {
                            bound: br.bound.max(diff * diff),
                            seq,
                            tree: br.tree,
                            node: far,
                        }));
                        seq += 1;
                        node = near;
                    }
                    Node::Leaf(points) => {
                        for &p in points {
                            let p = p as usize;
                            if checked[p] || stats.checks >= budget {
                                continue;
                            }
                            checked[p] = true;
                            stats.checks += 1;
                            insert_best(&mut best, k, p, dist2(x, codebook.centroid(p)));
                        }
                        break;
                    }
                }
            }
        }
        (best, stats)
    }
}

fn insert_best(best: &mut Vec<(usize, f64)>, k: usize, idx: usize, d: f64) {
    let pos = best
        .iter()
        .position(|&(i, bd)| d < bd || (d == bd && idx < i))
        .unwrap_or(best.len());
    if pos < k {
        best.insert(pos, (idx, d));
        best.truncate(k);
    }
}

fn build_node(
    cb: &Codebook,
    mut idx: Vec<u32>,
    nodes: &mut Vec<Node>,
    rng: &mut ChaCha8Rng,
) -> u32 {
    let id = nodes.len() as u32;
    if idx.len() <= 1 {
        nodes.push(Node::Leaf(idx));
        return id;
    }
    let d = cb.dim();
    let n = idx.len() as f64;
    let mut mean = vec![0.0; d];
    for &i in &idx {
        for (m, v) in mean.iter_mut().zip(cb.centroid(i as usize)) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![0.0; d];
    for &i in &idx {
        for ((s, v), m) in var.iter_mut().zip(cb.centroid(i as usize)).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    let mut order: Vec<usize> = (0..d).filter(|&j| var[j] > 0.0).collect();
    if order.is_empty() {
        // identical points cannot be separated
        nodes.push(Node::Leaf(idx));
        return id;
    }
    order.sort_by(|&a, &b| var[b].total_cmp(&var[a]).then(a.cmp(&b)));
    let top = order.len().min(SPLIT_CANDIDATES);
    let dim = order[rng.gen_range(0..top)];

    idx.sort_by(|&a, &b| {
        cb.centroid(a as usize)[dim]
            .total_cmp(&cb.centroid(b as usize)[dim])
            .then(a.cmp(&b))
    });
    let value = |i: u32| cb.centroid(i as usize)[dim];
    // median split, moved off runs of equal values so both sides are routed consistently
    let mid = idx.len() / 2;
    let mut cut = mid;
    while cut > 0 && value(idx[cut - 1]) == value(idx[cut]) {
        cut -= 1;
    }
    if cut == 0 {
        cut = mid;
        while cut < idx.len() && value(idx[cut - 1]) == value(idx[cut]) {
            cut += 1;
        }
    }
    let threshold = 0.5 * (value(idx[cut - 1]) + value(idx[cut]));
    let right_idx = idx.split_off(cut);

    nodes.push(Node::Leaf(Vec::new()));
    let left = build_node(cb, idx, nodes, rng);
    let right = build_node(cb, right_idx, nodes, rng);
    nodes[id as usize] = Node::Split {
        dim: dim as u32,
        threshold,
        left,
        right,
    };
    id
}
