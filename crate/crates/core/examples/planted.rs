//! Trains a graph on co-occurrences generated from a random tree metric and
//! reports how well shortest-path distances recover the tree distances.
//!
//! Usage: `cargo run --release --example planted -- [steps] [lambda] [seed]`

use graphglove::eval::spearman;
use graphglove::glove::{train_dense, DenseConfig, DenseEmbedding};
use graphglove::graph::prune;
use graphglove::synthetic::planted_tree;
use graphglove::train::{init_graph, train, TrainConfig};

fn main() -> graphglove::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let steps = args.get(1).map_or(5000, |s| s.parse().unwrap());
    let lambda = args.get(2).map_or(0.0, |s| s.parse().unwrap());
    let seed = args.get(3).map_or(0, |s| s.parse().unwrap());
    let n = 100;
    let planted = planted_tree(n, seed)?;
    let dense_cfg = DenseConfig { dim: 16, epochs: 200, lr: 0.05, seed, ..Default::default() };
    let (emb, rep): (DenseEmbedding<f64>, _) = train_dense(&planted.cooc, &dense_cfg)?;
    println!("dense loss {:.4} -> {:.4}", rep.initial_loss, rep.final_loss());
    let lr = std::env::var("LR").map_or(0.01, |s| s.parse().unwrap());
    let cfg = TrainConfig { lambda, lr, k_neighbors: 8, m_random: 4, r_zero: 8, steps, seed, ..Default::default() };
    let init = init_graph(&emb, &cfg)?;
    let t0 = std::time::Instant::now();
    let (trained, log) = train(&planted.cooc, init, &cfg)?;
    let g = prune(&trained);
    let d = g.all_pairs();
    let model: Vec<f64> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).map(|(i, j)| d[i][j]).collect();
    let rho = spearman(&model, &planted.pair_distances())?;
    let first = log.records[..50].iter().map(|r| r.loss).sum::<f64>() / 50.0;
    let last = log.records[log.records.len() - 50..].iter().map(|r| r.loss).sum::<f64>() / 50.0;
    println!(
        "steps {steps} lambda {lambda} seed {seed}: spearman {rho:.4} loss {first:.4} -> {last:.4} mean p {:.6} kept {}/{} ({:.1}s)",
        trained.mean_prob(),
        trained.kept_edge_count(),
        trained.n_edges(),
        t0.elapsed().as_secs_f64()
    );
    Ok(())
}
