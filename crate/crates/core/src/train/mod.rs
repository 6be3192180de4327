//! Stochastic graph training: batch sampling, loss and gradient estimation,
//! lazy Adam updates and checkpointing.

mod adam;
mod batch;
mod config;
mod init;
mod objective;
mod trainer;

pub use adam::{AdamParams, LazyAdam};
pub use batch::{sample_batch, Batch, BatchPair, BatchSampler};
pub use config::{LossKind, TrainConfig};
pub use init::{init_graph, initial_weight, MAX_INIT_WEIGHT, MIN_INIT_WEIGHT};
pub use objective::{
    estimate_gradients, glove_graph_loss, l0_penalty, Gradients, LossReport, PairDiagnostic, ScoreBaseline,
};
pub use trainer::{derive_seed, train, StepRecord, StopReason, Trainer, TrainingLog};
