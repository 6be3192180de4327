//! Planted-metric data: co-occurrences generated from a known tree metric.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::SparseCooccurrence;
use crate::error::{Error, Result};
use crate::graph::PrunedGraph;

pub const MIN_TREE_WEIGHT: f64 = 0.5;
pub const MAX_TREE_WEIGHT: f64 = 1.5;

/// A random weighted tree and the co-occurrences `X_ij = exp(C − d(i, j))`,
/// `i ≠ j`, with `C` the tree diameter so that every `X_ij ≥ 1`.
#[derive(Debug, Clone)]
pub struct PlantedTree {
    pub tree: PrunedGraph<f64>,
    /// Row-major `n × n` tree distances.
    pub distances: Vec<f64>,
    pub offset: f64,
    pub cooc: SparseCooccurrence,
}

impl PlantedTree {
    pub fn n_words(&self) -> usize {
        self.tree.n_vertices()
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.distances[i * self.n_words() + j]
    }

    /// Tree distances for all pairs `i < j`, in row-major order.
    pub fn pair_distances(&self) -> Vec<f64> {
        let n = self.n_words();
        (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).map(|(i, j)| self.distance(i, j)).collect()
    }
}

/// Random recursive tree: vertex `i > 0` attaches to a uniform earlier vertex
/// with weight uniform in `[MIN_TREE_WEIGHT, MAX_TREE_WEIGHT]`.
pub fn random_tree(n: usize, seed: u64) -> Result<PrunedGraph<f64>> {
    if n < 2 {
        return Err(Error::invalid("n", "a planted tree needs at least 2 nodes"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges: Vec<_> = (1..n)
        .map(|i| (rng.random_range(0..i), i, rng.random_range(MIN_TREE_WEIGHT..=MAX_TREE_WEIGHT)))
        .collect();
    PrunedGraph::new(n, edges)
}

pub fn planted_tree(n: usize, seed: u64) -> Result<PlantedTree> {
    let tree = random_tree(n, seed)?;
    let distances: Vec<f64> = tree.all_pairs().into_iter().flatten().collect();
    let offset = distances.iter().copied().fold(0.0, f64::max);
    let pairs = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .map(|(i, j)| (i, j, (offset - distances[i * n + j]).exp()));
    let cooc = SparseCooccurrence::from_pairs(n, pairs)?;
    Ok(PlantedTree { tree, distances, offset, cooc })
}
