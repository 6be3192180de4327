use crate::error::{Error, Result};
use crate::glove::{knn_all, DenseEmbedding};
use crate::graph::PrunedGraph;
use crate::scalar::Scalar;

/// How to build a graph from vectors. Edge weights are cosine distances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InducedGraphSpec {
    /// Edge `(i, j)` iff `1 − cos(i, j) < tau`.
    Thr { tau: f64 },
    /// Union of every word's `k` nearest-neighbour edges.
    Knn { k: usize },
}

fn check_embedding<T: Scalar>(emb: &DenseEmbedding<T>) -> Result<()> {
    if emb.n_words() < 2 {
        return Err(Error::invalid("embedding", "need at least 2 words"));
    }
    for i in 0..emb.n_words() {
        if emb.vector(i).iter().all(|x| *x == T::zero()) {
            return Err(Error::invalid("embedding", format!("word {i} has a zero vector")));
        }
    }
    Ok(())
}

fn cosine_distance<T: Scalar>(emb: &DenseEmbedding<T>, i: usize, j: usize) -> T {
    // Rounding can push identical directions slightly below zero.
    (T::one() - emb.cosine(i, j)).max(T::zero())
}

pub fn induce_graph<T: Scalar>(emb: &DenseEmbedding<T>, spec: InducedGraphSpec) -> Result<PrunedGraph<T>> {
    check_embedding(emb)?;
    let n = emb.n_words();
    match spec {
        InducedGraphSpec::Thr { tau } => {
            if !(tau > 0.0 && tau.is_finite()) {
                return Err(Error::invalid("tau", format!("must be positive, got {tau}")));
            }
            let tau = T::of(tau);
            let mut edges = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    let d = cosine_distance(emb, i, j);
                    if d < tau {
                        edges.push((i, j, d));
                    }
                }
            }
            PrunedGraph::new(n, edges)
        }
        InducedGraphSpec::Knn { k } => {
            if k == 0 || k >= n {
                return Err(Error::invalid("k", format!("must lie in 1..{n}, got {k}")));
            }
            let mut pairs: Vec<(usize, usize)> = knn_all(emb, k)?
                .into_iter()
                .enumerate()
                .flat_map(|(i, nn)| nn.into_iter().map(move |j| (i.min(j), i.max(j))))
                .collect();
            pairs.sort_unstable();
            pairs.dedup();
            PrunedGraph::new(n, pairs.into_iter().map(|(i, j)| (i, j, cosine_distance(emb, i, j))))
        }
    }
}

/// Threshold giving a THR graph with `target_edges` edges (as near as ties
/// allow): the midpoint between the `target_edges`-th and next smallest
/// pairwise cosine distance.
pub fn calibrate_tau<T: Scalar>(emb: &DenseEmbedding<T>, target_edges: usize) -> Result<f64> {
    check_embedding(emb)?;
    let n = emb.n_words();
    let mut d: Vec<f64> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .map(|(i, j)| cosine_distance(emb, i, j).as_f64())
        .collect();
    if target_edges == 0 || target_edges > d.len() {
        return Err(Error::invalid("target_edges", format!("must lie in 1..={}", d.len())));
    }
    if target_edges == d.len() {
        let max = d.iter().copied().fold(0.0, f64::max);
        return Ok(max + 1e-9 + max * 1e-9);
    }
    let (below, kth, _) = d.select_nth_unstable_by(target_edges, f64::total_cmp);
    let upper = *kth;
    let lower = below.iter().copied().fold(0.0, f64::max);
    let tau = 0.5 * (lower + upper);
    // Zero distances would need a threshold above zero.
    Ok(if tau > 0.0 { tau } else { upper.max(f64::MIN_POSITIVE) })
}

/// Fraction of possible undirected edges present.
pub fn edge_density<T: Scalar>(graph: &PrunedGraph<T>) -> f64 {
    let n = graph.n_vertices() as f64;
    if n < 2.0 {
        return 0.0;
    }
    graph.n_edges() as f64 / (n * (n - 1.0) / 2.0)
}
