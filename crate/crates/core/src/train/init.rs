use std::collections::BTreeMap;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::config::TrainConfig;
use crate::error::{Error, Result};
use crate::glove::{knn_all, DenseEmbedding};
use crate::graph::{StochasticEdge, StochasticGraph};
use crate::scalar::{logit, softplus_inv, Scalar};

pub const MIN_INIT_WEIGHT: f64 = 0.05;
pub const MAX_INIT_WEIGHT: f64 = 2.0;

/// Initial edge length for a pair of words with cosine similarity `cos`.
pub fn initial_weight(cos: f64) -> f64 {
    (1.0 - cos).clamp(MIN_INIT_WEIGHT, MAX_INIT_WEIGHT)
}

/// Initial graph: each word linked to its `K` cosine-nearest neighbours and
/// `M` uniformly random words, plus `R` zero-node edges to random words.
pub fn init_graph<T: Scalar>(embedding: &DenseEmbedding<T>, cfg: &TrainConfig) -> Result<StochasticGraph> {
    cfg.validate()?;
    let n = embedding.n_words();
    if cfg.k_neighbors + cfg.m_random >= n {
        return Err(Error::invalid(
            "k_neighbors",
            format!("K + M = {} must be below |V| = {n}", cfg.k_neighbors + cfg.m_random),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let neighbors = knn_all(embedding, cfg.k_neighbors)?;

    // (u, v) → theta_w, ordered so the edge list is canonical.
    let mut edges: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let add = |edges: &mut BTreeMap<(usize, usize), f64>, a: usize, b: usize| {
        let key = (a.min(b), a.max(b));
        edges.entry(key).or_insert_with(|| {
            let cos = embedding.cosine(a, b).as_f64();
            softplus_inv(initial_weight(cos))
        });
    };
    for (i, nn) in neighbors.iter().enumerate() {
        for &j in nn {
            add(&mut edges, i, j);
        }
        // Draw from the n - 1 other words.
        for k in index::sample(&mut rng, n - 1, cfg.m_random) {
            let j = if k >= i { k + 1 } else { k };
            add(&mut edges, i, j);
        }
    }
    let zero = n;
    let zero_theta = softplus_inv(cfg.zero_edge_weight);
    for j in index::sample(&mut rng, n, cfg.r_zero.min(n)) {
        edges.insert((j, zero), zero_theta);
    }

    let theta_p = logit(cfg.init_prob);
    let edges = edges
        .into_iter()
        .map(|((u, v), theta_w)| StochasticEdge::new(u, v, theta_w, theta_p))
        .collect();
    let normal = Normal::new(0.0, cfg.bias_std).map_err(|e| Error::invalid("bias_std", e.to_string()))?;
    let bias = (0..n).map(|_| normal.sample(&mut rng)).collect();
    StochasticGraph::new(n, edges, bias)
}
