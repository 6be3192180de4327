//! End-to-end run on the bundled corpus: vocabulary, co-occurrences, dense
//! initialization, graph training and WS353 similarity.
//!
//! Usage: `cargo run --release --example wiki -- [steps] [k] [m] [lambda] [lr]`

use std::io::{BufRead, BufReader};

use graphglove::corpus::{build_cooccurrence_sharded, build_vocabulary_sharded};
use graphglove::eval::{similarity_eval, OovPolicy, Representation, SimilarityBenchmark};
use graphglove::glove::{train_dense, DenseConfig, DenseEmbedding};
use graphglove::graph::{parameters_per_token, prune};
use graphglove::pipeline::smoothed_losses;
use graphglove::train::{init_graph, train, TrainConfig};

fn main() -> graphglove::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let arg = |i: usize, d: f64| args.get(i).map_or(d, |s| s.parse().unwrap());
    let steps = arg(1, 2000.0) as usize;
    let k = arg(2, 8.0) as usize;
    let m = arg(3, 2.0) as usize;
    let lambda = arg(4, 0.0);
    let lr = arg(5, 0.05);
    let data = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data");
    let t0 = std::time::Instant::now();
    let file = std::fs::File::open(data.join("wiki_small.txt.gz"))?;
    let lines: Vec<String> = BufReader::new(flate2::read::GzDecoder::new(file)).lines().collect::<Result<_, _>>()?;
    let vocab = build_vocabulary_sharded(&lines, 5000, 1, 1)?;
    let cooc = build_cooccurrence_sharded(&lines, &vocab, 10, 1)?;
    println!("vocab {} nnz {} ({:.1}s)", vocab.len(), cooc.nnz_total(), t0.elapsed().as_secs_f64());
    let ws = SimilarityBenchmark::load(&data.join("wordsim353.tsv"))?;
    let dense_cfg = DenseConfig { dim: 50, epochs: 15, lr: 0.05, ..Default::default() };
    let (emb, rep): (DenseEmbedding<f64>, _) = train_dense(&cooc, &dense_cfg)?;
    let dense_ws = similarity_eval(Representation::Dense(&emb), &vocab, &ws, OovPolicy::Skip)?;
    println!("dense loss {:.4} -> {:.4}, ws353 {:.4} ({}/{}) ({:.1}s)", rep.initial_loss, rep.final_loss(), dense_ws.spearman, dense_ws.attempted, dense_ws.attempted + dense_ws.skipped, t0.elapsed().as_secs_f64());
    let cfg = TrainConfig { k_neighbors: k, m_random: m, r_zero: 64, lambda, lr, steps, target_params_per_token: None, ..Default::default() };
    let init = init_graph(&emb, &cfg)?;
    println!("init edges {} ppt {:.2} ({:.1}s)", init.n_edges(), parameters_per_token(&prune(&init), vocab.len())?, t0.elapsed().as_secs_f64());
    let (trained, log) = train(&cooc, init, &cfg)?;
    let g = prune(&trained);
    let r = similarity_eval(Representation::Graph(&g), &vocab, &ws, OovPolicy::Skip)?;
    let (first, last) = smoothed_losses(&log, 50).unwrap();
    println!(
        "graph ws353 {:.4} ({}/{}) loss {first:.4} -> {last:.4} ppt {:.2} kept {} ({:.1}s)",
        r.spearman,
        r.attempted,
        r.attempted + r.skipped,
        parameters_per_token(&g, vocab.len())?,
        trained.kept_edge_count(),
        t0.elapsed().as_secs_f64()
    );
    Ok(())
}
