use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::TrainConfig;
use crate::corpus::SparseCooccurrence;

/// One sampled `(anchor, context)` entry.
///
/// `importance_weight` is `p_ij / q_ij`: the probability of picking the entry
/// uniformly among all stored entries over the probability of picking it by
/// first drawing a word and then one of its row entries. `scale` corrects for
/// the anchor and context counts actually drawn, so that the batch loss is an
/// unbiased estimate of the mean per-entry loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatchPair {
    pub anchor: u32,
    pub context: u32,
    pub x: f64,
    pub importance_weight: f64,
    pub scale: f64,
}

impl BatchPair {
    pub fn weight(&self) -> f64 {
        self.importance_weight * self.scale
    }
}

/// Pairs grouped by anchor, anchors ascending and unique.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub anchors: Vec<u32>,
    /// `pairs[offsets[k]..offsets[k + 1]]` belong to `anchors[k]`.
    pub offsets: Vec<usize>,
    pub pairs: Vec<BatchPair>,
    /// Total stored entries of the source matrix; multiplying the batch loss by
    /// this estimates the full-sum loss.
    pub nnz_total: usize,
}

impl Batch {
    /// Builds a batch from explicit pairs with unit weights; pairs are grouped by anchor.
    pub fn from_pairs(mut pairs: Vec<BatchPair>) -> Self {
        pairs.sort_by_key(|p| (p.anchor, p.context));
        let mut anchors = Vec::new();
        let mut offsets = Vec::new();
        for (k, p) in pairs.iter().enumerate() {
            if anchors.last() != Some(&p.anchor) {
                anchors.push(p.anchor);
                offsets.push(k);
            }
        }
        offsets.push(pairs.len());
        let nnz_total = pairs.len();
        Batch { anchors, offsets, pairs, nnz_total }
    }

    /// Every stored entry of `cooc` with unit weights; its loss is the exact
    /// full-sum loss.
    pub fn full(cooc: &SparseCooccurrence) -> Self {
        let pairs = cooc
            .iter()
            .map(|(i, j, x)| BatchPair { anchor: i as u32, context: j as u32, x, importance_weight: 1.0, scale: 1.0 })
            .collect();
        Batch::from_pairs(pairs)
    }

    pub fn anchor_pairs(&self, k: usize) -> &[BatchPair] {
        &self.pairs[self.offsets[k]..self.offsets[k + 1]]
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }
}

/// Anchor-batch sampler over a fixed co-occurrence matrix.
pub struct BatchSampler<'a> {
    cooc: &'a SparseCooccurrence,
    nonempty: Vec<u32>,
    b_anchors: usize,
    n_per_anchor: usize,
}

impl<'a> BatchSampler<'a> {
    pub fn new(cooc: &'a SparseCooccurrence, b_anchors: usize, n_per_anchor: usize) -> Self {
        let nonempty = (0..cooc.n_words())
            .filter(|&i| !cooc.row(i).is_empty())
            .map(|i| i as u32)
            .collect();
        BatchSampler { cooc, nonempty, b_anchors, n_per_anchor }
    }

    pub fn sample_seeded(&self, seed: u64) -> Batch {
        self.sample(&mut ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Batch {
        let n_words = self.cooc.n_words() as f64;
        let nnz = self.cooc.nnz_total() as f64;
        let b_eff = self.b_anchors.min(self.nonempty.len());
        let mut anchors: Vec<u32> = index::sample(rng, self.nonempty.len(), b_eff)
            .into_iter()
            .map(|k| self.nonempty[k])
            .collect();
        anchors.sort_unstable();

        let mut offsets = Vec::with_capacity(anchors.len() + 1);
        let mut pairs = Vec::new();
        for &a in &anchors {
            offsets.push(pairs.len());
            let row = self.cooc.row(a as usize);
            let r = row.len();
            let m = self.n_per_anchor.min(r);
            let importance_weight = (1.0 / nnz) / ((1.0 / n_words) * (1.0 / r as f64));
            let scale = self.nonempty.len() as f64 / (b_eff as f64 * n_words * m as f64);
            let mut picks: Vec<usize> = if m == r {
                (0..r).collect()
            } else {
                index::sample(rng, r, m).into_vec()
            };
            picks.sort_unstable();
            pairs.extend(picks.into_iter().map(|k| {
                let (j, x) = row[k];
                BatchPair { anchor: a, context: j, x, importance_weight, scale }
            }));
        }
        offsets.push(pairs.len());
        Batch { anchors, offsets, pairs, nnz_total: self.cooc.nnz_total() }
    }
}

/// Draws `b_anchors` distinct anchor words with non-empty rows, then up to
/// `n_per_anchor` distinct entries from each anchor's row.
pub fn sample_batch(cooc: &SparseCooccurrence, cfg: &TrainConfig, seed: u64) -> Batch {
    BatchSampler::new(cooc, cfg.b_anchors, cfg.n_per_anchor).sample_seeded(seed)
}
