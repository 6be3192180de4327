//! `graphglove` command-line pipeline.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use graphglove::eval::OovPolicy;
use graphglove::train::LossKind;

#[derive(Parser, Debug)]
#[command(name = "graphglove", version, about = "Graph word embeddings from co-occurrence statistics")]
pub struct Cli {
    /// Worker threads; 1 gives bit-reproducible runs. Defaults to all cores.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// TOML file with defaults; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Repeat for more log output.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Count tokens and keep the most frequent ones.
    BuildVocab(BuildVocab),
    /// Accumulate windowed co-occurrence counts.
    BuildCooc(BuildCooc),
    /// Train the dense GloVe baseline.
    TrainDense(TrainDense),
    /// Build the initial stochastic graph from a dense embedding.
    InitGraph(InitGraph),
    /// Train edge weights, edge probabilities and biases.
    TrainGraph(TrainGraph),
    /// Word similarity and analogy benchmarks.
    Evaluate(Evaluate),
    /// Centralities, cores, hierarchy, clusters and hyperbolicity.
    Analyze(Analyze),
    /// Write the pruned graph as an edge list.
    ExportEdges(ExportEdges),
    /// Repeat training and evaluation over several seeds.
    Variance(Variance),
}

#[derive(Args, Debug)]
pub struct BuildVocab {
    /// Whitespace-tokenized text, one document per line; `.gz` is decompressed.
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub max_size: Option<usize>,
    #[arg(long)]
    pub min_count: Option<u64>,
}

#[derive(Args, Debug)]
pub struct BuildCooc {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub vocab: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub window: Option<usize>,
}

#[derive(Args, Debug)]
pub struct TrainDense {
    #[arg(long)]
    pub cooc: PathBuf,
    #[arg(long)]
    pub vocab: PathBuf,
    /// Text embedding; biases go to a `.bias` sidecar.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug)]
pub struct InitGraph {
    #[arg(long)]
    pub embedding: PathBuf,
    #[arg(long)]
    pub vocab: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Nearest neighbours per word.
    #[arg(long)]
    pub k: Option<usize>,
    /// Random extra edges per word.
    #[arg(long)]
    pub m: Option<usize>,
    /// Zero-node edges.
    #[arg(long)]
    pub r_zero: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug)]
pub struct TrainGraph {
    #[arg(long)]
    pub cooc: PathBuf,
    /// Initial graph.
    #[arg(long, required_unless_present = "resume", conflicts_with = "resume")]
    pub graph: Option<PathBuf>,
    /// Checkpoint to continue from (graph plus `.opt` sidecar).
    #[arg(long)]
    pub resume: Option<PathBuf>,
    /// Checkpoint written at the end (graph plus `.opt` sidecar).
    #[arg(long)]
    pub out: PathBuf,
    /// Per-step CSV log; defaults to `<out>.log.csv`.
    #[arg(long)]
    pub log: Option<PathBuf>,
    /// Total step budget, counting steps done before a resume.
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, value_parser = parse_loss)]
    pub loss: Option<LossKind>,
    #[arg(long)]
    pub b_anchors: Option<usize>,
    #[arg(long)]
    pub n_per_anchor: Option<usize>,
    /// Stop once the pruned graph has at most this many parameters per token.
    #[arg(long)]
    pub target_ppt: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OovChoice {
    Skip,
    Infer,
    Both,
}

impl OovChoice {
    pub fn policies(self) -> Vec<OovPolicy> {
        match self {
            OovChoice::Skip => vec![OovPolicy::Skip],
            OovChoice::Infer => vec![OovPolicy::Infer],
            OovChoice::Both => vec![OovPolicy::Skip, OovPolicy::Infer],
        }
    }
}

#[derive(Args, Debug)]
#[group(id = "model", required = true, multiple = false, args = ["graph", "embedding"])]
pub struct ModelInput {
    /// Trained stochastic graph; evaluated after pruning.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Dense text embedding.
    #[arg(long)]
    pub embedding: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct Evaluate {
    #[command(flatten)]
    pub model: ModelInput,
    #[arg(long)]
    pub vocab: PathBuf,
    /// Similarity TSV files `word1<TAB>word2<TAB>score`.
    #[arg(long)]
    pub similarity: Vec<PathBuf>,
    /// Google-format analogy files or BATS directories.
    #[arg(long)]
    pub analogy: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = OovChoice::Both)]
    pub oov: OovChoice,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum InduceMode {
    Thr,
    Knn,
}

#[derive(Args, Debug)]
pub struct Analyze {
    #[command(flatten)]
    pub model: ModelInput,
    #[arg(long)]
    pub vocab: PathBuf,
    /// Graph induced from `--embedding`.
    #[arg(long, value_enum, default_value_t = InduceMode::Knn)]
    pub induce: InduceMode,
    /// Threshold for `--induce thr`.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Neighbours for `--induce knn`; with `--induce thr` and no `--tau`, the
    /// threshold is calibrated to the edge count of this KNN graph.
    #[arg(long)]
    pub k: Option<usize>,
    /// Taxonomy TSV for the hierarchy correlations.
    #[arg(long)]
    pub taxonomy: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long)]
    pub top: Option<usize>,
    #[arg(long)]
    pub cw_iterations: Option<usize>,
    /// Sampled quadruples per hyperbolicity estimate.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug)]
pub struct ExportEdges {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Write tokens instead of vertex ids; the zero node is written as `<zero>`.
    #[arg(long)]
    pub vocab: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum VarianceTask {
    /// Random tree metric; reports recovery Spearman, mean edge probability and edge count.
    Planted,
    /// Trains from a dense embedding and reports similarity scores.
    Corpus,
}

#[derive(Args, Debug)]
pub struct Variance {
    #[arg(long, value_enum, default_value_t = VarianceTask::Planted)]
    pub task: VarianceTask,
    /// Comma-separated seeds.
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Words in the planted tree.
    #[arg(long, default_value_t = 100)]
    pub planted_words: usize,
    #[arg(long, default_value_t = 0)]
    pub tree_seed: u64,
    #[arg(long, required_if_eq("task", "corpus"))]
    pub cooc: Option<PathBuf>,
    #[arg(long, required_if_eq("task", "corpus"))]
    pub vocab: Option<PathBuf>,
    #[arg(long, required_if_eq("task", "corpus"))]
    pub embedding: Option<PathBuf>,
    #[arg(long)]
    pub similarity: Vec<PathBuf>,
}

fn parse_loss(s: &str) -> Result<LossKind, String> {
    s.parse().map_err(|e: graphglove::Error| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
