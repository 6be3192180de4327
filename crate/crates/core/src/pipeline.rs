//! Run manifests, the planted-metric experiment and multi-seed variance studies.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::binio;
use crate::error::{Error, Result};
use crate::eval::{mean_std, spearman};
use crate::glove::{train_dense, DenseConfig, DenseEmbedding};
use crate::graph::prune;
use crate::synthetic::planted_tree;
use crate::train::{init_graph, train, TrainConfig, TrainingLog};

pub fn sha256_file(path: &Path) -> Result<String> {
    let mut r = binio::open(path)?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = r.read(&mut buf).map_err(|e| Error::File { path: path.to_path_buf(), source: e })?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

/// Provenance record written beside a command's outputs. The timestamp lives
/// only here, so artifacts themselves stay byte-reproducible.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub created_unix: u64,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub config: serde_json::Value,
    pub inputs: Vec<InputDigest>,
    pub outputs: Vec<String>,
    /// Headline numbers of the run, such as final losses.
    pub metrics: std::collections::BTreeMap<String, f64>,
}

impl Manifest {
    pub fn new(command: &str, config: &impl Serialize) -> Result<Self> {
        let config = serde_json::to_value(config).map_err(|e| Error::format("manifest config", e.to_string()))?;
        let created_unix =
            std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map_or(0, |d| d.as_secs());
        Ok(Manifest {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            created_unix,
            seed: None,
            workers: None,
            config,
            inputs: Vec::new(),
            outputs: Vec::new(),
            metrics: Default::default(),
        })
    }

    pub fn input(&mut self, path: &Path) -> Result<&mut Self> {
        let sha256 = sha256_file(path)?;
        self.inputs.push(InputDigest { path: path.display().to_string(), sha256 });
        Ok(self)
    }

    pub fn output(&mut self, path: &Path) -> &mut Self {
        self.outputs.push(path.display().to_string());
        self
    }

    pub fn metric(&mut self, name: &str, value: f64) -> &mut Self {
        self.metrics.insert(name.to_string(), value);
        self
    }

    /// `<primary output>.manifest.json`
    pub fn path_for(primary_output: &Path) -> PathBuf {
        let mut s = primary_output.as_os_str().to_owned();
        s.push(".manifest.json");
        PathBuf::from(s)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = binio::create(path)?;
        serde_json::to_writer_pretty(&mut w, self).map_err(|e| Error::format("manifest", e.to_string()))?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }
}

/// Settings of the planted-metric experiment: a random tree on `n_words`
/// nodes, a dense model for initialization, then graph training.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlantedConfig {
    pub n_words: usize,
    pub tree_seed: u64,
    pub dense: DenseConfig,
    pub train: TrainConfig,
}

impl Default for PlantedConfig {
    fn default() -> Self {
        PlantedConfig {
            n_words: 100,
            tree_seed: 0,
            dense: DenseConfig { dim: 16, epochs: 200, lr: 0.05, ..Default::default() },
            train: TrainConfig { k_neighbors: 8, m_random: 4, r_zero: 8, lr: 0.1, steps: 5000, ..Default::default() },
        }
    }
}

impl PlantedConfig {
    /// Same tree, with `seed` driving dense and graph training.
    pub fn with_seed(&self, seed: u64) -> Self {
        let mut c = self.clone();
        c.dense.seed = seed;
        c.train.seed = seed;
        c
    }
}

#[derive(Debug, Clone)]
pub struct PlantedOutcome {
    /// Spearman correlation of pruned-graph and tree distances over all pairs.
    pub spearman: f64,
    pub mean_edge_prob: f64,
    pub pruned_edges: usize,
    pub total_edges: usize,
    pub log: TrainingLog,
}

pub fn run_planted(cfg: &PlantedConfig) -> Result<PlantedOutcome> {
    let planted = planted_tree(cfg.n_words, cfg.tree_seed)?;
    let (emb, _): (DenseEmbedding<f64>, _) = train_dense(&planted.cooc, &cfg.dense)?;
    let init = init_graph(&emb, &cfg.train)?;
    let (trained, log) = train(&planted.cooc, init, &cfg.train)?;
    let graph = prune(&trained);
    let d = graph.all_pairs();
    let n = cfg.n_words;
    let model: Vec<f64> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).map(|(i, j)| d[i][j]).collect();
    Ok(PlantedOutcome {
        spearman: spearman(&model, &planted.pair_distances())?,
        mean_edge_prob: trained.mean_prob(),
        pruned_edges: trained.kept_edge_count(),
        total_edges: trained.n_edges(),
        log,
    })
}

/// Mean of a trailing window of losses at the start and end of a log.
pub fn smoothed_losses(log: &TrainingLog, window: usize) -> Option<(f64, f64)> {
    let losses: Vec<f64> = log.records.iter().map(|r| r.loss).collect();
    let w = window.min(losses.len());
    if w == 0 {
        return None;
    }
    let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
    Some((mean(&losses[..w]), mean(&losses[losses.len() - w..])))
}

/// Metric values per seed, with mean and unbiased standard deviation per metric.
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceReport {
    pub metrics: Vec<String>,
    pub seeds: Vec<u64>,
    /// `values[s][m]` is metric `m` under seed `s`.
    pub values: Vec<Vec<f64>>,
}

impl VarianceReport {
    /// `(metric, mean, std)`; std is NaN with a single seed.
    pub fn summary(&self) -> Vec<(String, f64, f64)> {
        self.metrics
            .iter()
            .enumerate()
            .map(|(m, name)| {
                let col: Vec<f64> = self.values.iter().map(|row| row[m]).collect();
                let (mean, std) = mean_std(&col);
                (name.clone(), mean, std)
            })
            .collect()
    }

    /// One row per seed, then `mean` and `std` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let header: Vec<String> = self.metrics.iter().map(|m| crate::eval::csv_field(m)).collect();
        writeln!(w, "seed,{}", header.join(","))?;
        for (seed, row) in self.seeds.iter().zip(&self.values) {
            writeln!(w, "{seed},{}", join(row))?;
        }
        let summary = self.summary();
        writeln!(w, "mean,{}", join(&summary.iter().map(|s| s.1).collect::<Vec<_>>()))?;
        writeln!(w, "std,{}", join(&summary.iter().map(|s| s.2).collect::<Vec<_>>()))?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let mut w = binio::create(path)?;
        self.write_csv(&mut w)?;
        w.flush()?;
        Ok(())
    }
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

/// Runs `run` once per seed. Every run must report the same metric names in
/// the same order.
pub fn variance_study(seeds: &[u64], mut run: impl FnMut(u64) -> Result<Vec<(String, f64)>>) -> Result<VarianceReport> {
    if seeds.is_empty() {
        return Err(Error::invalid("seeds", "need at least one seed"));
    }
    let mut metrics: Option<Vec<String>> = None;
    let mut values = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let result = run(seed)?;
        let names: Vec<String> = result.iter().map(|r| r.0.clone()).collect();
        match &metrics {
            None => metrics = Some(names),
            Some(m) if *m != names => {
                return Err(Error::invalid("metrics", format!("seed {seed} reported a different metric set")))
            }
            Some(_) => {}
        }
        values.push(result.into_iter().map(|r| r.1).collect());
    }
    Ok(VarianceReport { metrics: metrics.unwrap_or_default(), seeds: seeds.to_vec(), values })
}
