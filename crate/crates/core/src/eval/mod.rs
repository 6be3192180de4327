//! Word-similarity and analogy evaluation of graph and dense models.

mod analogy;
mod benchmarks;
mod report;
mod similarity;
mod stats;

pub use analogy::{analogy_eval, analogy_eval_rows, AnalogyResult, CategoryAccuracy, SimilarityRows};
pub use benchmarks::{AnalogyBenchmark, AnalogyQuestion, SimilarityBenchmark};
pub(crate) use report::csv_field;
pub use report::{EvalReport, ReportRow};
pub use similarity::{distance_profile, sim_g, similarity_eval, OovPolicy, Representation, SimilarityResult};
pub use stats::{average_ranks, mean_std, pearson, spearman};
