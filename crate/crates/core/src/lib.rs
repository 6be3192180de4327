pub mod analysis;
mod binio;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod glove;
pub mod graph;
pub mod pipeline;
pub mod scalar;
pub mod synthetic;
pub mod train;

pub use error::{Error, Result};

/// Pruned graph over double precision weights.
pub type Graph = graph::PrunedGraph<f64>;
/// Dense embedding in double precision.
pub type Embedding = glove::DenseEmbedding<f64>;
