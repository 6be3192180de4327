//! Euclidean GloVe baseline.
//!
//! Minimizes `Σ f(X_ij) (w_iᵀ w̃_j + b_i + b̃_j − log X_ij)²` over the stored
//! entries of a co-occurrence matrix with per-entry Adam steps. The exported
//! vector for a word is `w_i + w̃_i`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::io::{BufRead, Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::binio;
use crate::corpus::{SparseCooccurrence, Vocabulary};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const X_MAX: f64 = 100.0;
pub const ALPHA: f64 = 0.75;

/// `min(1, (x / x_max)^alpha)`.
pub fn glove_weight<T: Scalar>(x: T, x_max: T, alpha: T) -> T {
    if x >= x_max {
        T::one()
    } else {
        (x / x_max).powf(alpha)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseEmbedding<T> {
    dim: usize,
    w: Vec<T>,
    w_tilde: Vec<T>,
    b: Vec<T>,
    b_tilde: Vec<T>,
    combined: Vec<T>,
}

impl<T: Scalar> DenseEmbedding<T> {
    pub fn new(dim: usize, w: Vec<T>, w_tilde: Vec<T>, b: Vec<T>, b_tilde: Vec<T>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dim", "must be positive"));
        }
        let n = b.len();
        if w.len() != n * dim || w_tilde.len() != n * dim || b_tilde.len() != n {
            return Err(Error::invalid("embedding", "inconsistent parameter shapes"));
        }
        let mut e = DenseEmbedding {
            dim,
            w,
            w_tilde,
            b,
            b_tilde,
            combined: Vec::new(),
        };
        e.refresh_combined();
        e.check_finite()?;
        Ok(e)
    }

    /// Wraps already-combined vectors; context vectors and biases are zero.
    pub fn from_vectors(dim: usize, vectors: Vec<T>) -> Result<Self> {
        if dim == 0 || vectors.len() % dim != 0 {
            return Err(Error::invalid("dim", "vector buffer is not a multiple of dim"));
        }
        let n = vectors.len() / dim;
        Self::new(dim, vectors, vec![T::zero(); n * dim], vec![T::zero(); n], vec![T::zero(); n])
    }

    fn refresh_combined(&mut self) {
        self.combined = self.w.iter().zip(&self.w_tilde).map(|(&a, &b)| a + b).collect();
    }

    fn check_finite(&self) -> Result<()> {
        let all = self.w.iter().chain(&self.w_tilde).chain(&self.b).chain(&self.b_tilde);
        if all.into_iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("embedding contains non-finite values".into()));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_words(&self) -> usize {
        self.b.len()
    }

    /// Exported vector `w_i + w̃_i`.
    pub fn vector(&self, i: usize) -> &[T] {
        &self.combined[i * self.dim..(i + 1) * self.dim]
    }

    pub fn main_vector(&self, i: usize) -> &[T] {
        &self.w[i * self.dim..(i + 1) * self.dim]
    }

    pub fn context_vector(&self, i: usize) -> &[T] {
        &self.w_tilde[i * self.dim..(i + 1) * self.dim]
    }

    pub fn bias(&self, i: usize) -> T {
        self.b[i]
    }

    pub fn context_bias(&self, i: usize) -> T {
        self.b_tilde[i]
    }

    pub fn cosine(&self, i: usize, j: usize) -> T {
        cosine(self.vector(i), self.vector(j))
    }

    /// Writes the `|V| dim` header followed by `token v1 … vdim` lines.
    pub fn write_text<W: Write>(&self, vocab: &Vocabulary, mut out: W) -> Result<()> {
        if vocab.len() != self.n_words() {
            return Err(Error::invalid("vocab", "size differs from embedding"));
        }
        writeln!(out, "{} {}", self.n_words(), self.dim)?;
        for i in 0..self.n_words() {
            write!(out, "{}", vocab.token(i))?;
            for v in self.vector(i) {
                write!(out, " {v}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    pub fn write_biases<W: Write>(&self, mut out: W) -> Result<()> {
        binio::write_magic(&mut out, BIAS_MAGIC)?;
        binio::write_u64(&mut out, self.n_words() as u64)?;
        for &v in self.b.iter().chain(&self.b_tilde) {
            binio::write_f64(&mut out, v.as_f64())?;
        }
        Ok(())
    }

    /// Reads the text format. Token order must match `vocab`.
    pub fn read_text<R: BufRead>(r: R, vocab: &Vocabulary) -> Result<Self> {
        const WHAT: &str = "embedding file";
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| Error::format(WHAT, "missing header"))??;
        let mut it = header.split_whitespace();
        let parse = |s: Option<&str>| -> Result<usize> {
            s.and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::format(WHAT, "header must be `<count> <dim>`"))
        };
        let (n, dim) = (parse(it.next())?, parse(it.next())?);
        if n != vocab.len() {
            return Err(Error::format(WHAT, format!("{n} vectors but vocabulary has {}", vocab.len())));
        }
        let mut vectors = Vec::with_capacity(n * dim);
        for i in 0..n {
            let line = lines
                .next()
                .ok_or_else(|| Error::format(WHAT, format!("expected {n} vectors, found {i}")))??;
            let mut fields = line.split(' ');
            let tok = fields.next().unwrap_or_default();
            if tok != vocab.token(i) {
                return Err(Error::format(
                    WHAT,
                    format!("line {}: token {tok:?} does not match vocabulary entry {:?}", i + 2, vocab.token(i)),
                ));
            }
            let before = vectors.len();
            for f in fields {
                let v: f64 = f
                    .parse()
                    .map_err(|_| Error::format(WHAT, format!("line {}: bad number {f:?}", i + 2)))?;
                vectors.push(T::of(v));
            }
            if vectors.len() - before != dim {
                return Err(Error::format(WHAT, format!("line {}: expected {dim} components", i + 2)));
            }
        }
        Self::from_vectors(dim, vectors)
    }

    pub fn read_biases<R: Read>(&mut self, mut r: R) -> Result<()> {
        const WHAT: &str = "bias sidecar";
        binio::read_magic(&mut r, BIAS_MAGIC, WHAT)?;
        let n = binio::read_u64(&mut r, WHAT)? as usize;
        if n != self.n_words() {
            return Err(Error::format(WHAT, format!("{n} biases for {} words", self.n_words())));
        }
        for i in 0..n {
            self.b[i] = T::of(binio::read_f64(&mut r, WHAT)?);
        }
        for i in 0..n {
            self.b_tilde[i] = T::of(binio::read_f64(&mut r, WHAT)?);
        }
        binio::expect_eof(&mut r, WHAT)
    }

    pub fn save(&self, vocab: &Vocabulary, path: &Path) -> Result<()> {
        let mut w = binio::create(path)?;
        self.write_text(vocab, &mut w)?;
        w.flush()?;
        let mut w = binio::create(&bias_path(path))?;
        self.write_biases(&mut w)?;
        w.flush()?;
        Ok(())
    }

    /// Loads vectors and, when present, the bias sidecar next to them.
    pub fn load(vocab: &Vocabulary, path: &Path) -> Result<Self> {
        let mut e = Self::read_text(binio::open(path)?, vocab)?;
        let bp = bias_path(path);
        if bp.exists() {
            e.read_biases(binio::open(&bp)?)?;
        }
        Ok(e)
    }
}

const BIAS_MAGIC: &[u8] = b"GBIAS1";

/// Sidecar file holding main and context biases next to an embedding file.
pub fn bias_path(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".bias");
    s.into()
}

pub fn cosine<T: Scalar>(a: &[T], b: &[T]) -> T {
    let mut dot = T::zero();
    let mut na = T::zero();
    let mut nb = T::zero();
    for (&x, &y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    let denom = (na * nb).sqrt();
    if denom > T::zero() {
        dot / denom
    } else {
        T::zero()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct DenseConfig {
    pub dim: usize,
    pub epochs: usize,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_eps: f64,
    pub x_max: f64,
    pub alpha: f64,
    pub seed: u64,
}

impl Default for DenseConfig {
    fn default() -> Self {
        DenseConfig {
            dim: 50,
            epochs: 25,
            lr: 0.025,
            beta1: 0.9,
            beta2: 0.999,
            adam_eps: 1e-8,
            x_max: X_MAX,
            alpha: ALPHA,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseTrainReport {
    pub initial_loss: f64,
    /// Mean weighted loss over stored entries after each epoch.
    pub epoch_losses: Vec<f64>,
}

impl DenseTrainReport {
    pub fn final_loss(&self) -> f64 {
        self.epoch_losses.last().copied().unwrap_or(self.initial_loss)
    }
}

fn residual<T: Scalar>(emb: &DenseEmbedding<T>, i: usize, j: usize, log_x: T) -> T {
    let mut dot = T::zero();
    for (&a, &b) in emb.main_vector(i).iter().zip(emb.context_vector(j)) {
        dot += a * b;
    }
    dot + emb.b[i] + emb.b_tilde[j] - log_x
}

/// Mean of `f(X_ij) · residual²` over stored entries.
pub fn glove_objective<T: Scalar>(emb: &DenseEmbedding<T>, cooc: &SparseCooccurrence, x_max: f64, alpha: f64) -> f64 {
    let mut total = 0.0;
    for (i, j, x) in cooc.iter() {
        let r = residual(emb, i, j, T::of(x.ln())).as_f64();
        total += glove_weight(x, x_max, alpha) * r * r;
    }
    total / cooc.nnz_total().max(1) as f64
}

/// Gradient of [`glove_objective`]; layout mirrors the parameters `(w, w̃, b, b̃)`.
#[derive(Debug, Clone)]
pub struct DenseGradient {
    pub w: Vec<f64>,
    pub w_tilde: Vec<f64>,
    pub b: Vec<f64>,
    pub b_tilde: Vec<f64>,
}

pub fn glove_gradient<T: Scalar>(
    emb: &DenseEmbedding<T>,
    cooc: &SparseCooccurrence,
    x_max: f64,
    alpha: f64,
) -> DenseGradient {
    let d = emb.dim;
    let n = emb.n_words();
    let mut g = DenseGradient {
        w: vec![0.0; n * d],
        w_tilde: vec![0.0; n * d],
        b: vec![0.0; n],
        b_tilde: vec![0.0; n],
    };
    let scale = 1.0 / cooc.nnz_total().max(1) as f64;
    for (i, j, x) in cooc.iter() {
        let r = residual(emb, i, j, T::of(x.ln())).as_f64();
        let c = 2.0 * glove_weight(x, x_max, alpha) * r * scale;
        for k in 0..d {
            g.w[i * d + k] += c * emb.w_tilde[j * d + k].as_f64();
            g.w_tilde[j * d + k] += c * emb.w[i * d + k].as_f64();
        }
        g.b[i] += c;
        g.b_tilde[j] += c;
    }
    g
}

/// Adam moments for one parameter row, advanced only when the row is touched.
#[derive(Clone)]
struct RowAdam<T> {
    m: Vec<T>,
    v: Vec<T>,
    steps: Vec<u32>,
}

impl<T: Scalar> RowAdam<T> {
    fn new(rows: usize, width: usize) -> Self {
        RowAdam {
            m: vec![T::zero(); rows * width],
            v: vec![T::zero(); rows * width],
            steps: vec![0; rows],
        }
    }
}

struct AdamCoeffs<T> {
    lr: T,
    beta1: T,
    beta2: T,
    eps: T,
}

impl<T: Scalar> AdamCoeffs<T> {
    /// Applies one step to `params` (row `row` of width `params.len()`).
    fn step(&self, state: &mut RowAdam<T>, row: usize, params: &mut [T], grads: &[T]) {
        let width = params.len();
        state.steps[row] += 1;
        let t = state.steps[row] as i32;
        let c1 = T::one() - self.beta1.powi(t);
        let c2 = T::one() - self.beta2.powi(t);
        let base = row * width;
        for k in 0..width {
            let g = grads[k];
            let m = &mut state.m[base + k];
            let v = &mut state.v[base + k];
            *m = self.beta1 * *m + (T::one() - self.beta1) * g;
            *v = self.beta2 * *v + (T::one() - self.beta2) * g * g;
            params[k] -= self.lr * (*m / c1) / ((*v / c2).sqrt() + self.eps);
        }
    }
}

/// Trains the dense baseline. Deterministic for a given seed.
pub fn train_dense<T: Scalar>(
    cooc: &SparseCooccurrence,
    cfg: &DenseConfig,
) -> Result<(DenseEmbedding<T>, DenseTrainReport)> {
    if cfg.dim == 0 {
        return Err(Error::invalid("dim", "must be positive"));
    }
    if cfg.epochs == 0 {
        return Err(Error::invalid("epochs", "must be positive"));
    }
    if cooc.nnz_total() == 0 {
        return Err(Error::Empty("co-occurrence matrix has no entries".into()));
    }
    let n = cooc.n_words();
    let d = cfg.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let half = 0.5 / d as f64;
    let mut init = |len: usize| -> Vec<T> { (0..len).map(|_| T::of(rng.random_range(-half..=half))).collect() };
    let w = init(n * d);
    let w_tilde = init(n * d);
    let b = init(n);
    let b_tilde = init(n);
    let mut emb = DenseEmbedding {
        dim: d,
        w,
        w_tilde,
        b,
        b_tilde,
        combined: Vec::new(),
    };

    let adam = AdamCoeffs {
        lr: T::of(cfg.lr),
        beta1: T::of(cfg.beta1),
        beta2: T::of(cfg.beta2),
        eps: T::of(cfg.adam_eps),
    };
    let mut st_w = RowAdam::new(n, d);
    let mut st_wt = RowAdam::new(n, d);
    let mut st_b = RowAdam::new(n, 1);
    let mut st_bt = RowAdam::new(n, 1);

    let entries: Vec<(u32, u32, T, T)> = cooc
        .iter()
        .map(|(i, j, x)| {
            (i as u32, j as u32, T::of(x.ln()), T::of(glove_weight(x, cfg.x_max, cfg.alpha)))
        })
        .collect();
    let mut order: Vec<usize> = (0..entries.len()).collect();
    let initial_loss = glove_objective(&emb, cooc, cfg.x_max, cfg.alpha);
    let mut epoch_losses = Vec::with_capacity(cfg.epochs);
    let mut gw = vec![T::zero(); d];
    let mut gwt = vec![T::zero(); d];
    let two = T::of(2.0);

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for &e in &order {
            let (i, j, log_x, fx) = entries[e];
            let (i, j) = (i as usize, j as usize);
            let c = two * fx * residual(&emb, i, j, log_x);
            for k in 0..d {
                gw[k] = c * emb.w_tilde[j * d + k];
                gwt[k] = c * emb.w[i * d + k];
            }
            adam.step(&mut st_w, i, &mut emb.w[i * d..(i + 1) * d], &gw);
            adam.step(&mut st_wt, j, &mut emb.w_tilde[j * d..(j + 1) * d], &gwt);
            adam.step(&mut st_b, i, &mut emb.b[i..i + 1], &[c]);
            adam.step(&mut st_bt, j, &mut emb.b_tilde[j..j + 1], &[c]);
        }
        let loss = glove_objective(&emb, cooc, cfg.x_max, cfg.alpha);
        if !loss.is_finite() {
            return Err(Error::Numerical(format!("dense training diverged at epoch {}", epoch + 1)));
        }
        log::debug!("dense epoch {}: loss {loss:.6}", epoch + 1);
        epoch_losses.push(loss);
    }
    emb.refresh_combined();
    emb.check_finite()?;
    Ok((
        emb,
        DenseTrainReport {
            initial_loss,
            epoch_losses,
        },
    ))
}

#[derive(PartialEq)]
struct Candidate<T> {
    dist: T,
    id: usize,
}

impl<T: PartialOrd> Eq for Candidate<T> {}

impl<T: PartialOrd> Ord for Candidate<T> {
    // Max-heap on (dist, id): the worst kept candidate sits on top.
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist
            .partial_cmp(&other.dist)
            .unwrap_or(Ordering::Equal)
            .then(self.id.cmp(&other.id))
    }
}

impl<T: PartialOrd> PartialOrd for Candidate<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// `k` nearest words to `word` by cosine distance over the exported vectors,
/// nearest first, ties broken by lower id.
pub fn knn<T: Scalar>(emb: &DenseEmbedding<T>, word: usize, k: usize) -> Result<Vec<usize>> {
    let n = emb.n_words();
    if word >= n {
        return Err(Error::invalid("word", format!("id {word} outside vocabulary of {n}")));
    }
    if k == 0 || k >= n {
        return Err(Error::invalid("k", format!("need 0 < k < |V| = {n}, got {k}")));
    }
    let norms: Vec<T> = (0..n).map(|i| squared_norm(emb.vector(i))).collect();
    Ok(knn_with_norms(emb, &norms, word, k))
}

fn squared_norm<T: Scalar>(v: &[T]) -> T {
    let mut s = T::zero();
    for &x in v {
        s += x * x;
    }
    s
}

fn knn_with_norms<T: Scalar>(emb: &DenseEmbedding<T>, norms: &[T], word: usize, k: usize) -> Vec<usize> {
    let q = emb.vector(word);
    let mut heap: BinaryHeap<Candidate<T>> = BinaryHeap::with_capacity(k + 1);
    for j in 0..emb.n_words() {
        if j == word {
            continue;
        }
        // Same arithmetic as `cosine` so ties resolve identically.
        let denom = (norms[word] * norms[j]).sqrt();
        let sim = if denom > T::zero() {
            let mut dot = T::zero();
            for (&a, &b) in q.iter().zip(emb.vector(j)) {
                dot += a * b;
            }
            dot / denom
        } else {
            T::zero()
        };
        let cand = Candidate { dist: T::one() - sim, id: j };
        if heap.len() < k {
            heap.push(cand);
        } else if cand < *heap.peek().expect("heap holds k items") {
            heap.pop();
            heap.push(cand);
        }
    }
    heap.into_sorted_vec().into_iter().map(|c| c.id).collect()
}

/// [`knn`] for every word, computed in parallel.
pub fn knn_all<T: Scalar>(emb: &DenseEmbedding<T>, k: usize) -> Result<Vec<Vec<usize>>> {
    let n = emb.n_words();
    if k == 0 || k >= n {
        return Err(Error::invalid("k", format!("need 0 < k < |V| = {n}, got {k}")));
    }
    let norms: Vec<T> = (0..n).map(|i| squared_norm(emb.vector(i))).collect();
    Ok((0..n).into_par_iter().map(|i| knn_with_norms(emb, &norms, i, k)).collect())
}
