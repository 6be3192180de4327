use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use graphglove::corpus::{build_cooccurrence_sharded, build_vocabulary_sharded, SparseCooccurrence, Vocabulary};
use graphglove::eval::{similarity_eval, OovPolicy, Representation, SimilarityBenchmark};
use graphglove::glove::{train_dense, DenseConfig, DenseEmbedding};
use graphglove::graph::{prune, StochasticGraph};
use graphglove::train::{init_graph, train, TrainConfig};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn lines(n: usize) -> Vec<String> {
    let file = std::fs::File::open(data("wiki_small.txt.gz")).unwrap();
    BufReader::new(flate2::read::GzDecoder::new(file)).lines().take(n).map(|l| l.unwrap()).collect()
}

#[test]
fn counts_do_not_depend_on_shards() {
    let text = lines(30);
    let v1 = build_vocabulary_sharded(&text, 400, 2, 1).unwrap();
    let v4 = build_vocabulary_sharded(&text, 400, 2, 4).unwrap();
    assert_eq!(v1.tokens(), v4.tokens());
    assert_eq!(v1.freq(), v4.freq());
    let c1 = build_cooccurrence_sharded(&text, &v1, 10, 1).unwrap();
    let c3 = build_cooccurrence_sharded(&text, &v1, 10, 3).unwrap();
    assert_eq!(c1.rows(), c3.rows());
    assert!(c1.is_symmetric(0.0));
}

#[test]
fn corpus_to_evaluated_graph_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let text = lines(40);
    let vocab = build_vocabulary_sharded(&text, 300, 1, 2).unwrap();
    vocab.save(&dir.path().join("vocab.tsv")).unwrap();
    let vocab = Vocabulary::load(&dir.path().join("vocab.tsv")).unwrap();
    let cooc = build_cooccurrence_sharded(&text, &vocab, 10, 2).unwrap();
    cooc.save(&dir.path().join("cooc.bin")).unwrap();
    let cooc = SparseCooccurrence::load(&dir.path().join("cooc.bin")).unwrap();
    assert_eq!(cooc.n_words(), vocab.len());

    let dense = DenseConfig { dim: 10, epochs: 5, ..Default::default() };
    let (emb, report): (DenseEmbedding<f64>, _) = train_dense(&cooc, &dense).unwrap();
    assert!(report.final_loss() < report.initial_loss);
    emb.save(&vocab, &dir.path().join("dense.txt")).unwrap();
    let emb: DenseEmbedding<f64> = DenseEmbedding::load(&vocab, &dir.path().join("dense.txt")).unwrap();

    let cfg = TrainConfig { k_neighbors: 5, m_random: 1, r_zero: 8, steps: 40, lr: 0.05, ..Default::default() };
    let (trained, log) = train(&cooc, init_graph(&emb, &cfg).unwrap(), &cfg).unwrap();
    assert_eq!(log.records.len(), 40);
    let path = dir.path().join("model.graph");
    trained.save(&path).unwrap();
    let loaded = StochasticGraph::load(&path).unwrap();
    assert_eq!(loaded, trained);

    let graph = prune(&loaded);
    let ws = SimilarityBenchmark::load(&data("wordsim353.tsv")).unwrap();
    let skip = similarity_eval(Representation::Graph(&graph), &vocab, &ws, OovPolicy::Skip).unwrap();
    let infer = similarity_eval(Representation::Graph(&graph), &vocab, &ws, OovPolicy::Infer).unwrap();
    assert!(skip.attempted > 0 && skip.skipped > 0);
    assert_eq!(skip.attempted + skip.skipped, infer.attempted);
    assert!(skip.spearman.is_finite() && infer.spearman.is_finite());
}
