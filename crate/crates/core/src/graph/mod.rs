//! Weighted word graphs.
//!
//! A [`StochasticGraph`] carries learnable per-edge weight and presence
//! parameters and is what training updates. [`prune`] turns it into a
//! deterministic [`PrunedGraph`] by keeping edges with presence probability at
//! least one half. Both expose the [`WeightedGraph`] view that
//! [`shortest_paths`] runs on; a stochastic graph is viewed through an
//! [`EdgeMask`] sample.

mod io;
mod paths;
mod pruned;
mod stochastic;

pub use io::{read_edge_tsv, write_edge_tsv};
pub use paths::{shortest_paths, ShortestPaths};
pub(crate) use pruned::ppt;
pub use pruned::{graph_dot, parameters_per_token, PrunedGraph};
pub use stochastic::{prune, sample_mask, EdgeMask, MaskedGraph, StochasticEdge, StochasticGraph};

use crate::scalar::Scalar;

/// Read-only adjacency access used by the path algorithms.
pub trait WeightedGraph<T: Scalar>: Sync {
    fn n_vertices(&self) -> usize;

    /// Calls `f(neighbor, weight, edge_index)` for each usable edge at `v`.
    fn for_each_neighbor<F: FnMut(usize, T, usize)>(&self, v: usize, f: F);
}
