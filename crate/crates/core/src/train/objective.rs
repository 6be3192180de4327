//! Batch loss and gradient estimation on a sampled graph.
//!
//! The data term for an entry is `f(X_ij) (S_ij + b_i + b_j − log X_ij)²`
//! with `S_ij = −d(i, j)` or the graph dot product. Weight and bias gradients
//! are pathwise through the shortest paths found on the sampled mask; edge
//! probability gradients combine a score-function estimate with the analytic
//! derivative of the mean-probability penalty.
//!
//! A search only reads edges incident to vertices it settles, and whether it
//! settles an endpoint of `e` does not depend on `e`'s own mask bit. Each
//! anchor's loss is therefore credited only to the edges its search read,
//! which keeps the score-function estimate unbiased while removing the noise
//! of unrelated anchors. Under the dot product the zero-node search feeds
//! every pair, so edges it reads take the whole batch loss.

use rayon::prelude::*;

use super::batch::{Batch, BatchPair};
use super::config::{LossKind, TrainConfig};
use crate::error::Result;
use crate::glove::glove_weight;
use crate::graph::{shortest_paths, EdgeMask, MaskedGraph, ShortestPaths, StochasticGraph};
use crate::scalar::sigmoid;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairDiagnostic {
    pub anchor: u32,
    pub context: u32,
    /// `S_ij`, or NaN when a required distance is infinite.
    pub score: f64,
    pub residual: f64,
    pub skipped: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossReport {
    /// Importance-weighted batch loss (unbiased for the mean per-entry loss).
    pub loss: f64,
    pub used_pairs: usize,
    /// Pairs dropped because the sampled graph disconnects them.
    pub skipped_pairs: usize,
    pub pairs: Vec<PairDiagnostic>,
}

/// Gradients of the regularized objective, dense over parameters, with flags
/// marking which entries this step actually touched.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub theta_w: Vec<f64>,
    pub theta_p: Vec<f64>,
    pub bias: Vec<f64>,
    pub touched_w: Vec<bool>,
    pub touched_p: Vec<bool>,
    pub touched_bias: Vec<bool>,
}

impl Gradients {
    pub fn zeros(n_edges: usize, n_words: usize) -> Self {
        Gradients {
            theta_w: vec![0.0; n_edges],
            theta_p: vec![0.0; n_edges],
            bias: vec![0.0; n_words],
            touched_w: vec![false; n_edges],
            touched_p: vec![false; n_edges],
            touched_bias: vec![false; n_words],
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.theta_w
            .iter()
            .chain(&self.theta_p)
            .chain(&self.bias)
            .fold(0.0f64, |m, g| m.max(g.abs()))
    }
}

/// Running-mean baselines subtracted from losses in the score-function term:
/// one per anchor word, one over all anchor losses (used for words not yet
/// seen as anchors) and one for the whole batch. Only losses from earlier
/// steps enter a baseline, so it never depends on the current mask.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreBaseline {
    pub batch: Option<f64>,
    pub anchor: Option<f64>,
    pub per_word: Vec<Option<f64>>,
    pub momentum: f64,
}

impl ScoreBaseline {
    pub fn new(n_words: usize, momentum: f64) -> Self {
        ScoreBaseline { batch: None, anchor: None, per_word: vec![None; n_words], momentum }
    }

    fn for_anchor(&self, word: usize) -> f64 {
        self.per_word[word].or(self.anchor).unwrap_or(0.0)
    }

    fn blend(slot: &mut Option<f64>, momentum: f64, loss: f64) {
        *slot = Some(match *slot {
            None => loss,
            Some(b) => momentum * b + (1.0 - momentum) * loss,
        });
    }
}

struct AnchorPart {
    loss: f64,
    used: usize,
    skipped: usize,
    diags: Vec<PairDiagnostic>,
    weight_grad: Vec<(u32, f64)>,
    bias_grad: Vec<(u32, f64)>,
    zero_coef: Vec<(u32, f64)>,
    settled: Vec<u32>,
}

struct Evaluation {
    report: LossReport,
    /// ∂loss/∂w(e) for every edge.
    d_weight: Vec<f64>,
    d_bias: Vec<f64>,
    touched_bias: Vec<bool>,
    /// Per anchor, in batch order: its loss and the vertices its search settled.
    anchor_searches: Vec<(f64, Vec<u32>)>,
    /// Vertices settled by the zero-node search.
    zero_settled: Vec<u32>,
}

/// Pushes per-target path coefficients up a shortest-path tree, producing
/// `(edge, Σ coefficients of targets below it)`.
fn propagate(sp: &ShortestPaths<f64>, coef: &mut [f64], out: &mut Vec<(u32, f64)>) {
    for &v in sp.settled_order().iter().rev() {
        let c = coef[v as usize];
        if c == 0.0 {
            continue;
        }
        if let Some((p, e)) = sp.parent(v as usize) {
            out.push((e as u32, c));
            coef[p] += c;
        }
    }
}

fn evaluate_anchor(
    view: &MaskedGraph<'_>,
    zero_sp: Option<&ShortestPaths<f64>>,
    anchor: u32,
    pairs: &[BatchPair],
    cfg: &TrainConfig,
    with_grad: bool,
) -> Result<AnchorPart> {
    let graph = view.graph();
    let bias = graph.bias();
    let targets: Vec<usize> = pairs.iter().map(|p| p.context as usize).collect();
    let sp = shortest_paths(view, anchor as usize, Some(&targets))?;
    let a = anchor as usize;
    let mut part = AnchorPart {
        loss: 0.0,
        used: 0,
        skipped: 0,
        diags: Vec::with_capacity(pairs.len()),
        weight_grad: Vec::new(),
        bias_grad: Vec::new(),
        zero_coef: Vec::new(),
        settled: Vec::new(),
    };
    let mut coef = if with_grad { vec![0.0; view.graph().n_vertices()] } else { Vec::new() };
    let mut anchor_zero_coef = 0.0;
    for p in pairs {
        let j = p.context as usize;
        let dij = sp.distance(j);
        let score = match cfg.loss_kind {
            LossKind::Distance => -dij,
            LossKind::DotProduct => {
                let z = zero_sp.expect("zero-node search runs for the dot product");
                let (da, dj) = (z.distance(a), z.distance(j));
                0.5 * (da * da + dj * dj - dij * dij)
            }
        };
        if !score.is_finite() {
            part.skipped += 1;
            part.diags.push(PairDiagnostic {
                anchor: p.anchor,
                context: p.context,
                score: f64::NAN,
                residual: f64::NAN,
                skipped: true,
            });
            continue;
        }
        let residual = score + bias[a] + bias[j] - p.x.ln();
        let weight = p.weight() * glove_weight(p.x, cfg.x_max, cfg.alpha);
        part.loss += weight * residual * residual;
        part.used += 1;
        part.diags.push(PairDiagnostic { anchor: p.anchor, context: p.context, score, residual, skipped: false });
        if !with_grad {
            continue;
        }
        // g = ∂loss/∂S
        let g = 2.0 * weight * residual;
        part.bias_grad.push((a as u32, g));
        part.bias_grad.push((j as u32, g));
        match cfg.loss_kind {
            LossKind::Distance => coef[j] -= g,
            LossKind::DotProduct => {
                let z = zero_sp.expect("zero-node search runs for the dot product");
                coef[j] -= g * dij;
                anchor_zero_coef += g * z.distance(a);
                part.zero_coef.push((j as u32, g * z.distance(j)));
            }
        }
    }
    if with_grad {
        if anchor_zero_coef != 0.0 {
            part.zero_coef.push((a as u32, anchor_zero_coef));
        }
        propagate(&sp, &mut coef, &mut part.weight_grad);
        part.settled = sp.settled_order().to_vec();
    }
    Ok(part)
}

fn evaluate(view: &MaskedGraph<'_>, batch: &Batch, cfg: &TrainConfig, with_grad: bool) -> Result<Evaluation> {
    let graph = view.graph();
    let n_vertices = graph.n_vertices();
    let zero_sp = match cfg.loss_kind {
        LossKind::DotProduct => Some(shortest_paths(view, graph.zero_node(), None)?),
        LossKind::Distance => None,
    };
    let parts: Vec<AnchorPart> = (0..batch.anchors.len())
        .into_par_iter()
        .map(|k| evaluate_anchor(view, zero_sp.as_ref(), batch.anchors[k], batch.anchor_pairs(k), cfg, with_grad))
        .collect::<Result<_>>()?;

    // Merge in anchor order so results do not depend on the thread count.
    let mut eval = Evaluation {
        report: LossReport { loss: 0.0, used_pairs: 0, skipped_pairs: 0, pairs: Vec::with_capacity(batch.len()) },
        d_weight: if with_grad { vec![0.0; graph.n_edges()] } else { Vec::new() },
        d_bias: if with_grad { vec![0.0; graph.n_words()] } else { Vec::new() },
        touched_bias: if with_grad { vec![false; graph.n_words()] } else { Vec::new() },
        anchor_searches: Vec::new(),
        zero_settled: Vec::new(),
    };
    let mut zero_coef = if with_grad && zero_sp.is_some() { vec![0.0; n_vertices] } else { Vec::new() };
    for part in parts {
        eval.report.loss += part.loss;
        eval.report.used_pairs += part.used;
        eval.report.skipped_pairs += part.skipped;
        eval.report.pairs.extend(part.diags);
        if !with_grad {
            continue;
        }
        for (e, g) in part.weight_grad {
            eval.d_weight[e as usize] += g;
        }
        for (i, g) in part.bias_grad {
            eval.d_bias[i as usize] += g;
            eval.touched_bias[i as usize] = true;
        }
        for (v, c) in part.zero_coef {
            zero_coef[v as usize] += c;
        }
        eval.anchor_searches.push((part.loss, part.settled));
    }
    if with_grad {
        if let Some(zsp) = &zero_sp {
            let mut edges = Vec::new();
            propagate(zsp, &mut zero_coef, &mut edges);
            for (e, g) in edges {
                eval.d_weight[e as usize] += g;
            }
            eval.zero_settled = zsp.settled_order().to_vec();
        }
    }
    Ok(eval)
}

/// Importance-weighted GloVe loss of `batch` on one sampled graph. Pairs whose
/// distances are infinite under the mask are skipped and counted.
pub fn glove_graph_loss(view: &MaskedGraph<'_>, batch: &Batch, cfg: &TrainConfig) -> Result<LossReport> {
    Ok(evaluate(view, batch, cfg, false)?.report)
}

/// Gradient of `E[loss] + λ · mean_e p(e)` for one batch and one mask sample.
///
/// The score-function part covers only edges read by this step's searches.
/// `baseline` is read, then updated with this step's losses.
pub fn estimate_gradients(
    graph: &StochasticGraph,
    mask: &EdgeMask,
    batch: &Batch,
    cfg: &TrainConfig,
    baseline: &mut ScoreBaseline,
) -> Result<(Gradients, LossReport)> {
    let view = MaskedGraph::new(graph, mask)?;
    let eval = evaluate(&view, batch, cfg, true)?;
    let n_edges = graph.n_edges();
    let mut grads = Gradients::zeros(n_edges, graph.n_words());
    if baseline.per_word.len() != graph.n_words() {
        baseline.per_word.resize(graph.n_words(), None);
    }

    for (e, edge) in graph.edges().iter().enumerate() {
        let d = eval.d_weight[e];
        if d != 0.0 {
            grads.theta_w[e] = d * sigmoid(edge.theta_w);
            grads.touched_w[e] = true;
        }
    }
    grads.bias = eval.d_bias;
    grads.touched_bias = eval.touched_bias;

    // advantage[e]: summed (loss − baseline) of the searches that read e.
    let mut advantage = vec![0.0; n_edges];
    let mut stamp = vec![u32::MAX; n_edges];
    for (k, (loss, settled)) in eval.anchor_searches.iter().enumerate() {
        let anchor = batch.anchors[k] as usize;
        let adv = loss - baseline.for_anchor(anchor);
        for &v in settled {
            for &(_, e) in graph.incident(v as usize) {
                let e = e as usize;
                if stamp[e] != k as u32 {
                    stamp[e] = k as u32;
                    advantage[e] += adv;
                    grads.touched_p[e] = true;
                }
            }
        }
    }
    let total = eval.report.loss;
    let batch_adv = total - baseline.batch.unwrap_or(0.0);
    for &v in &eval.zero_settled {
        for &(_, e) in graph.incident(v as usize) {
            advantage[e as usize] = batch_adv;
            grads.touched_p[e as usize] = true;
        }
    }
    for (e, edge) in graph.edges().iter().enumerate() {
        if advantage[e] != 0.0 {
            let p = edge.prob();
            let score = if mask.present[e] { 1.0 - p } else { -p };
            grads.theta_p[e] += advantage[e] * score;
        }
    }
    for (k, (loss, _)) in eval.anchor_searches.iter().enumerate() {
        ScoreBaseline::blend(&mut baseline.per_word[batch.anchors[k] as usize], baseline.momentum, *loss);
    }
    if !eval.anchor_searches.is_empty() {
        let mean = eval.anchor_searches.iter().map(|(l, _)| l).sum::<f64>() / eval.anchor_searches.len() as f64;
        ScoreBaseline::blend(&mut baseline.anchor, baseline.momentum, mean);
    }
    ScoreBaseline::blend(&mut baseline.batch, baseline.momentum, total);

    if cfg.lambda > 0.0 && n_edges > 0 {
        let c = cfg.lambda / n_edges as f64;
        for (e, edge) in graph.edges().iter().enumerate() {
            let p = edge.prob();
            grads.theta_p[e] += c * p * (1.0 - p);
            grads.touched_p[e] = true;
        }
    }
    Ok((grads, eval.report))
}

/// The penalty term `λ · mean_e p(e)`.
pub fn l0_penalty(graph: &StochasticGraph, lambda: f64) -> f64 {
    lambda * graph.mean_prob()
}
