use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::pruned::PrunedGraph;
use super::WeightedGraph;
use crate::error::{Error, Result};
use crate::scalar::{sigmoid, softplus};

/// Undirected edge with weight `softplus(theta_w)` and presence probability
/// `sigmoid(theta_p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StochasticEdge {
    u: u32,
    v: u32,
    pub theta_w: f64,
    pub theta_p: f64,
}

impl StochasticEdge {
    pub fn new(a: usize, b: usize, theta_w: f64, theta_p: f64) -> Self {
        let (u, v) = if a < b { (a, b) } else { (b, a) };
        StochasticEdge { u: u as u32, v: v as u32, theta_w, theta_p }
    }

    pub fn u(&self) -> usize {
        self.u as usize
    }

    pub fn v(&self) -> usize {
        self.v as usize
    }

    pub fn weight(&self) -> f64 {
        softplus(self.theta_w)
    }

    pub fn prob(&self) -> f64 {
        sigmoid(self.theta_p)
    }
}

/// Word graph with learnable edges. Vertex ids `0..n_words` are words; vertex
/// `n_words` is the zero node.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticGraph {
    n_words: usize,
    edges: Vec<StochasticEdge>,
    bias: Vec<f64>,
    adjacency: Vec<Vec<(u32, u32)>>,
}

impl StochasticGraph {
    pub fn new(n_words: usize, edges: Vec<StochasticEdge>, bias: Vec<f64>) -> Result<Self> {
        if bias.len() != n_words {
            return Err(Error::invalid("bias", format!("{} biases for {n_words} words", bias.len())));
        }
        let n_vertices = n_words + 1;
        let mut adjacency: Vec<Vec<(u32, u32)>> = vec![Vec::new(); n_vertices];
        for (e, edge) in edges.iter().enumerate() {
            if edge.v() >= n_vertices {
                return Err(Error::VertexOutOfRange { vertex: edge.v(), n_vertices });
            }
            if edge.u == edge.v {
                return Err(Error::invalid("edges", format!("self-loop at {}", edge.u)));
            }
            if !edge.theta_w.is_finite() || !edge.theta_p.is_finite() {
                return Err(Error::invalid("edges", format!("edge {e} has non-finite parameters")));
            }
            adjacency[edge.u()].push((edge.v, e as u32));
            adjacency[edge.v()].push((edge.u, e as u32));
        }
        for (v, list) in adjacency.iter_mut().enumerate() {
            list.sort_unstable();
            if list.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(Error::invalid("edges", format!("duplicate edge at vertex {v}")));
            }
        }
        if bias.iter().any(|b| !b.is_finite()) {
            return Err(Error::invalid("bias", "non-finite bias"));
        }
        Ok(StochasticGraph { n_words, edges, bias, adjacency })
    }

    pub fn n_words(&self) -> usize {
        self.n_words
    }

    pub fn n_vertices(&self) -> usize {
        self.n_words + 1
    }

    pub fn zero_node(&self) -> usize {
        self.n_words
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[StochasticEdge] {
        &self.edges
    }

    /// Parameter access; endpoints stay fixed.
    pub fn edges_mut(&mut self) -> &mut [StochasticEdge] {
        &mut self.edges
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn bias_mut(&mut self) -> &mut [f64] {
        &mut self.bias
    }

    /// `(neighbor, edge index)` pairs sorted by neighbor.
    pub fn incident(&self, v: usize) -> &[(u32, u32)] {
        &self.adjacency[v]
    }

    pub fn mean_prob(&self) -> f64 {
        if self.edges.is_empty() {
            return 0.0;
        }
        self.edges.iter().map(StochasticEdge::prob).sum::<f64>() / self.edges.len() as f64
    }

    /// Number of edges that survive [`prune`].
    pub fn kept_edge_count(&self) -> usize {
        self.edges.iter().filter(|e| e.prob() >= 0.5).count()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.edges.iter().map(StochasticEdge::weight).collect()
    }

    pub fn all_finite(&self) -> bool {
        self.bias.iter().all(|b| b.is_finite())
            && self.edges.iter().all(|e| e.theta_w.is_finite() && e.theta_p.is_finite())
    }
}

/// One Bernoulli draw per edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeMask {
    pub present: Vec<bool>,
    pub seed: u64,
}

impl EdgeMask {
    pub fn all_present(graph: &StochasticGraph) -> Self {
        EdgeMask { present: vec![true; graph.n_edges()], seed: 0 }
    }

    pub fn count_present(&self) -> usize {
        self.present.iter().filter(|&&p| p).count()
    }
}

/// Samples each edge independently with probability `sigmoid(theta_p)`.
pub fn sample_mask(graph: &StochasticGraph, seed: u64) -> EdgeMask {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let present = graph.edges.iter().map(|e| rng.random::<f64>() < e.prob()).collect();
    EdgeMask { present, seed }
}

/// A stochastic graph seen through one mask sample, with weights precomputed.
pub struct MaskedGraph<'a> {
    graph: &'a StochasticGraph,
    present: &'a [bool],
    weights: Vec<f64>,
}

impl<'a> MaskedGraph<'a> {
    pub fn new(graph: &'a StochasticGraph, mask: &'a EdgeMask) -> Result<Self> {
        if mask.present.len() != graph.n_edges() {
            return Err(Error::invalid(
                "mask",
                format!("{} entries for {} edges", mask.present.len(), graph.n_edges()),
            ));
        }
        Ok(MaskedGraph { graph, present: &mask.present, weights: graph.weights() })
    }

    pub fn graph(&self) -> &StochasticGraph {
        self.graph
    }

    pub fn weight(&self, edge: usize) -> f64 {
        self.weights[edge]
    }

    pub fn is_present(&self, edge: usize) -> bool {
        self.present[edge]
    }
}

impl WeightedGraph<f64> for MaskedGraph<'_> {
    fn n_vertices(&self) -> usize {
        self.graph.n_vertices()
    }

    fn for_each_neighbor<F: FnMut(usize, f64, usize)>(&self, v: usize, mut f: F) {
        for &(u, e) in &self.graph.adjacency[v] {
            if self.present[e as usize] {
                f(u as usize, self.weights[e as usize], e as usize);
            }
        }
    }
}

/// Keeps the edges with presence probability at least 0.5.
pub fn prune(graph: &StochasticGraph) -> PrunedGraph<f64> {
    let kept = graph
        .edges
        .iter()
        .filter(|e| e.prob() >= 0.5)
        .map(|e| (e.u(), e.v(), e.weight()));
    PrunedGraph::new(graph.n_vertices(), kept)
        .and_then(|g| g.with_zero_node(graph.zero_node()))
        .expect("stochastic graph invariants carry over")
}
