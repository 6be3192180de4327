use std::io::Write;
use std::path::{Path, PathBuf};

use log::{debug, info};

use super::adam::{AdamParams, LazyAdam};
use super::batch::BatchSampler;
use super::config::TrainConfig;
use super::objective::{estimate_gradients, ScoreBaseline};
use crate::binio;
use crate::corpus::SparseCooccurrence;
use crate::error::{Error, Result};
use crate::graph::{ppt, sample_mask, StochasticGraph};

const OPT_MAGIC: &[u8] = b"GGOPT1";

const STREAM_BATCH: u64 = 1;
const STREAM_MASK: u64 = 2;

/// Seed for one random stream at one step; independent of thread count.
pub fn derive_seed(seed: u64, step: u64, stream: u64) -> u64 {
    let mut z = seed
        .wrapping_add(step.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(stream.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    /// Batch estimate of the mean per-entry loss, before the update.
    pub loss: f64,
    pub mean_edge_prob: f64,
    /// Edges kept by pruning, after the update.
    pub pruned_edge_count: usize,
    pub skipped_pairs: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    StepLimit,
    TargetReached,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingLog {
    pub records: Vec<StepRecord>,
    pub stop_reason: StopReason,
}

impl TrainingLog {
    pub const CSV_HEADER: &'static str = "step,loss,mean_edge_prob,pruned_edge_count,skipped_pairs";

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", Self::CSV_HEADER)?;
        for r in &self.records {
            writeln!(w, "{},{},{},{},{}", r.step, r.loss, r.mean_edge_prob, r.pruned_edge_count, r.skipped_pairs)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        self.write_csv(binio::create(path)?)
    }

    pub fn last(&self) -> Option<&StepRecord> {
        self.records.last()
    }
}

/// Stateful optimizer for a stochastic graph on one co-occurrence matrix.
pub struct Trainer<'a> {
    cfg: TrainConfig,
    sampler: BatchSampler<'a>,
    vocab_size: usize,
    graph: StochasticGraph,
    adam_w: LazyAdam,
    adam_p: LazyAdam,
    adam_b: LazyAdam,
    baseline: ScoreBaseline,
    step: usize,
}

impl<'a> Trainer<'a> {
    pub fn new(cooc: &'a SparseCooccurrence, graph: StochasticGraph, cfg: TrainConfig) -> Result<Self> {
        cfg.validate()?;
        if cooc.n_words() != graph.n_words() {
            return Err(Error::invalid(
                "graph",
                format!("{} words in graph, {} in co-occurrence", graph.n_words(), cooc.n_words()),
            ));
        }
        if cooc.nnz_total() == 0 {
            return Err(Error::Empty("co-occurrence matrix has no entries".into()));
        }
        let (e, n) = (graph.n_edges(), graph.n_words());
        Ok(Trainer {
            sampler: BatchSampler::new(cooc, cfg.b_anchors, cfg.n_per_anchor),
            vocab_size: n,
            adam_w: LazyAdam::new(e),
            adam_p: LazyAdam::new(e),
            adam_b: LazyAdam::new(n),
            baseline: ScoreBaseline::new(n, cfg.baseline_momentum),
            step: 0,
            cfg,
            graph,
        })
    }

    pub fn graph(&self) -> &StochasticGraph {
        &self.graph
    }

    pub fn into_graph(self) -> StochasticGraph {
        self.graph
    }

    pub fn steps_done(&self) -> usize {
        self.step
    }

    pub fn config(&self) -> &TrainConfig {
        &self.cfg
    }

    /// Parameters per token of the graph that pruning would produce now.
    pub fn params_per_token(&self) -> f64 {
        ppt(self.vocab_size, self.graph.kept_edge_count())
    }

    fn hp(&self) -> AdamParams {
        AdamParams { lr: self.cfg.lr, beta1: self.cfg.beta1, beta2: self.cfg.beta2, eps: self.cfg.adam_eps }
    }

    /// One optimization step. On a non-finite loss, gradient or update the graph
    /// is left untouched and a numerical error is returned.
    pub fn step(&mut self) -> Result<StepRecord> {
        let t = self.step as u64;
        let batch = self.sampler.sample_seeded(derive_seed(self.cfg.seed, t, STREAM_BATCH));
        let mask = sample_mask(&self.graph, derive_seed(self.cfg.seed, t, STREAM_MASK));
        let mut baseline = self.baseline.clone();
        let (grads, report) = estimate_gradients(&self.graph, &mask, &batch, &self.cfg, &mut baseline)?;
        if !report.loss.is_finite() || !grads.max_abs().is_finite() {
            return Err(Error::Numerical(format!("non-finite loss or gradient at step {}", self.step)));
        }
        self.baseline = baseline;

        let hp = self.hp();
        let mut theta_w: Vec<f64> = self.graph.edges().iter().map(|e| e.theta_w).collect();
        let mut theta_p: Vec<f64> = self.graph.edges().iter().map(|e| e.theta_p).collect();
        let mut bias = self.graph.bias().to_vec();
        self.adam_w.step(&mut theta_w, &grads.theta_w, &grads.touched_w, hp);
        self.adam_p.step(&mut theta_p, &grads.theta_p, &grads.touched_p, hp);
        self.adam_b.step(&mut bias, &grads.bias, &grads.touched_bias, hp);
        if !theta_w.iter().chain(&theta_p).chain(&bias).all(|x| x.is_finite()) {
            return Err(Error::Numerical(format!("non-finite parameters after step {}", self.step)));
        }
        for ((edge, w), p) in self.graph.edges_mut().iter_mut().zip(theta_w).zip(theta_p) {
            edge.theta_w = w;
            edge.theta_p = p;
        }
        self.graph.bias_mut().copy_from_slice(&bias);

        let record = StepRecord {
            step: self.step,
            loss: report.loss,
            mean_edge_prob: self.graph.mean_prob(),
            pruned_edge_count: self.graph.kept_edge_count(),
            skipped_pairs: report.skipped_pairs,
        };
        self.step += 1;
        Ok(record)
    }

    /// Runs until `cfg.steps` total steps or the parameter target is met.
    pub fn run(&mut self) -> Result<TrainingLog> {
        let mut records = Vec::new();
        let log_every = (self.cfg.steps / 20).max(1);
        while self.step < self.cfg.steps {
            let r = self.step()?;
            debug!("step {} loss {:.6} p̄ {:.4} kept {}", r.step, r.loss, r.mean_edge_prob, r.pruned_edge_count);
            if r.step % log_every == 0 {
                info!("step {} loss {:.6} kept edges {}", r.step, r.loss, r.pruned_edge_count);
            }
            records.push(r);
            if let Some(target) = self.cfg.target_params_per_token {
                if self.params_per_token() <= target {
                    return Ok(TrainingLog { records, stop_reason: StopReason::TargetReached });
                }
            }
        }
        Ok(TrainingLog { records, stop_reason: StopReason::StepLimit })
    }

    /// Path of the optimizer sidecar written next to a graph checkpoint.
    pub fn optimizer_path(graph_path: &Path) -> PathBuf {
        let mut s = graph_path.as_os_str().to_owned();
        s.push(".opt");
        PathBuf::from(s)
    }

    /// Writes the graph to `path` and optimizer state to its sidecar.
    pub fn save_checkpoint(&self, path: &Path) -> Result<()> {
        self.graph.save(path)?;
        let opt_path = Self::optimizer_path(path);
        let mut w = binio::create(&opt_path)?;
        binio::write_magic(&mut w, OPT_MAGIC)?;
        binio::write_u64(&mut w, self.step as u64)?;
        write_optional(&mut w, self.baseline.batch)?;
        write_optional(&mut w, self.baseline.anchor)?;
        for &b in &self.baseline.per_word {
            write_optional(&mut w, b)?;
        }
        self.adam_w.write_to(&mut w)?;
        self.adam_p.write_to(&mut w)?;
        self.adam_b.write_to(&mut w)?;
        w.flush().map_err(|e| Error::File { path: opt_path, source: e })
    }

    /// Restores a trainer from [`Trainer::save_checkpoint`] output. Continuing
    /// reproduces an uninterrupted run with the same configuration.
    pub fn resume(cooc: &'a SparseCooccurrence, path: &Path, cfg: TrainConfig) -> Result<Self> {
        let graph = StochasticGraph::load(path)?;
        let mut trainer = Trainer::new(cooc, graph, cfg)?;
        let what = "optimizer checkpoint";
        let mut r = binio::open(&Self::optimizer_path(path))?;
        binio::read_magic(&mut r, OPT_MAGIC, what)?;
        trainer.step = binio::read_u64(&mut r, what)? as usize;
        trainer.baseline.batch = read_optional(&mut r, what)?;
        trainer.baseline.anchor = read_optional(&mut r, what)?;
        for k in 0..trainer.baseline.per_word.len() {
            trainer.baseline.per_word[k] = read_optional(&mut r, what)?;
        }
        let (e, n) = (trainer.graph.n_edges(), trainer.graph.n_words());
        trainer.adam_w = LazyAdam::read_from(&mut r, e)?;
        trainer.adam_p = LazyAdam::read_from(&mut r, e)?;
        trainer.adam_b = LazyAdam::read_from(&mut r, n)?;
        binio::expect_eof(&mut r, what)?;
        Ok(trainer)
    }
}

fn write_optional<W: Write>(w: &mut W, v: Option<f64>) -> Result<()> {
    binio::write_u32(w, v.is_some() as u32)?;
    binio::write_f64(w, v.unwrap_or(0.0))
}

fn read_optional<R: std::io::Read>(r: &mut R, what: &str) -> Result<Option<f64>> {
    let flag = binio::read_u32(r, what)?;
    let v = binio::read_f64(r, what)?;
    match flag {
        0 => Ok(None),
        1 => Ok(Some(v)),
        _ => Err(Error::format(what, "bad baseline flag")),
    }
}

/// Trains `init` for `cfg.steps` steps (or until the parameter target) and
/// returns the final graph with its per-step log.
pub fn train(
    cooc: &SparseCooccurrence,
    init: StochasticGraph,
    cfg: &TrainConfig,
) -> Result<(StochasticGraph, TrainingLog)> {
    let mut trainer = Trainer::new(cooc, init, cfg.clone())?;
    let log = trainer.run()?;
    Ok((trainer.into_graph(), log))
}
