use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::graph::PrunedGraph;
use crate::scalar::Scalar;

/// Similarity assigned to an edge from its distance weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Affinity {
    /// `exp(−w)`
    #[default]
    NegExp,
    /// `1 / (1 + w)`
    Inverse,
    /// `1` for every edge.
    Unit,
}

impl Affinity {
    pub fn apply(self, w: f64) -> f64 {
        match self {
            Affinity::NegExp => (-w).exp(),
            Affinity::Inverse => 1.0 / (1.0 + w),
            Affinity::Unit => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterSet {
    /// Cluster id of every vertex; ids are numbered by smallest member.
    pub assignment: Vec<usize>,
    /// Members of every cluster, ascending.
    pub clusters: Vec<Vec<usize>>,
    pub iterations: usize,
    pub converged: bool,
}

impl ClusterSet {
    fn from_labels(labels: &[usize], iterations: usize, converged: bool) -> Self {
        let mut compact = vec![usize::MAX; labels.len()];
        let mut clusters: Vec<Vec<usize>> = Vec::new();
        let assignment = labels
            .iter()
            .enumerate()
            .map(|(v, &l)| {
                if compact[l] == usize::MAX {
                    compact[l] = clusters.len();
                    clusters.push(Vec::new());
                }
                clusters[compact[l]].push(v);
                compact[l]
            })
            .collect();
        ClusterSet { assignment, clusters, iterations, converged }
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }
}

pub fn chinese_whispers<T: Scalar>(graph: &PrunedGraph<T>, iterations: usize, seed: u64) -> ClusterSet {
    chinese_whispers_with(graph, iterations, seed, Affinity::NegExp)
}

/// Label propagation from unique labels. Each iteration visits vertices in a
/// fresh seeded order; a vertex takes the neighbor label with the largest
/// affinity sum, keeping its own label when that label is among the maxima.
/// Stops after the first iteration that changes nothing.
pub fn chinese_whispers_with<T: Scalar>(
    graph: &PrunedGraph<T>,
    iterations: usize,
    seed: u64,
    affinity: Affinity,
) -> ClusterSet {
    let n = graph.n_vertices();
    let affinities: Vec<f64> = graph.edges().iter().map(|e| affinity.apply(e.2.as_f64())).collect();
    let mut labels: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut sums: Vec<(usize, f64)> = Vec::new();
    let mut best: Vec<usize> = Vec::new();
    for it in 1..=iterations {
        order.shuffle(&mut rng);
        let mut changed = false;
        for &v in &order {
            if graph.degree(v) == 0 {
                continue;
            }
            sums.clear();
            sums.extend(graph.neighbors(v).iter().map(|&(u, e)| (labels[u as usize], affinities[e as usize])));
            sums.sort_by_key(|s| s.0);
            sums.dedup_by(|next, kept| {
                let same = next.0 == kept.0;
                if same {
                    kept.1 += next.1;
                }
                same
            });
            let top = sums.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
            best.clear();
            best.extend(sums.iter().filter(|s| s.1 == top).map(|s| s.0));
            if best.contains(&labels[v]) {
                continue;
            }
            labels[v] = best[if best.len() == 1 { 0 } else { rng.random_range(0..best.len()) }];
            changed = true;
        }
        if !changed {
            return ClusterSet::from_labels(&labels, it, true);
        }
    }
    ClusterSet::from_labels(&labels, iterations, false)
}
