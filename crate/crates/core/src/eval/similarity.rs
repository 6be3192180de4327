use std::collections::HashMap;

use rayon::prelude::*;

use super::benchmarks::SimilarityBenchmark;
use super::stats::{pearson, spearman};
use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::glove::DenseEmbedding;
use crate::graph::{shortest_paths, PrunedGraph};
use crate::scalar::Scalar;

/// A trained model to evaluate. Graph word ids are `0..vocab.len()`; any
/// further vertices (such as the zero node) are not words.
#[derive(Debug, Clone, Copy)]
pub enum Representation<'a, T> {
    Graph(&'a PrunedGraph<T>),
    Dense(&'a DenseEmbedding<T>),
}

impl<T: Scalar> Representation<'_, T> {
    pub(crate) fn check_vocab(&self, vocab: &Vocabulary) -> Result<()> {
        let ok = match self {
            Representation::Graph(g) => vocab.len() <= g.n_vertices(),
            Representation::Dense(e) => vocab.len() == e.n_words(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid("vocab", "vocabulary size does not match the representation"))
        }
    }
}

/// Handling of benchmark words missing from the vocabulary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OovPolicy {
    /// Drop pairs with an OOV word.
    Skip,
    /// Score `(w, OOV)` by the mean over other words; `(OOV, OOV)` ranks last.
    Infer,
}

impl std::str::FromStr for OovPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "skip" => Ok(OovPolicy::Skip),
            "infer" => Ok(OovPolicy::Infer),
            _ => Err(Error::invalid("oov", format!("unknown policy {s:?} (skip|infer)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityResult {
    pub benchmark: String,
    pub spearman: f64,
    /// Pairs that entered the correlation.
    pub attempted: usize,
    /// Pairs dropped by the skip policy.
    pub skipped: usize,
    /// Pairs with at least one OOV word scored by the infer policy.
    pub inferred: usize,
}

/// Per-word similarity oracle with lazily cached searches.
struct Scorer<'a, T> {
    rep: Representation<'a, T>,
    n_words: usize,
    /// Graph: distances to every word; dense: unused.
    rows: HashMap<usize, Vec<f64>>,
}

impl<'a, T: Scalar> Scorer<'a, T> {
    fn new(rep: Representation<'a, T>, n_words: usize, words: &[usize]) -> Result<Self> {
        let rows = match rep {
            Representation::Graph(g) => {
                let mut ids = words.to_vec();
                ids.sort_unstable();
                ids.dedup();
                let rows: Vec<(usize, Vec<f64>)> = ids
                    .par_iter()
                    .map(|&w| {
                        let sp = shortest_paths(g, w, None)?;
                        Ok((w, (0..n_words).map(|v| sp.distance(v).as_f64()).collect()))
                    })
                    .collect::<Result<_>>()?;
                rows.into_iter().collect()
            }
            Representation::Dense(_) => HashMap::new(),
        };
        Ok(Scorer { rep, n_words, rows })
    }

    /// Model similarity: `−d` for graphs, cosine for dense vectors.
    fn similarity(&self, a: usize, b: usize) -> f64 {
        match self.rep {
            Representation::Graph(_) => -self.rows[&a][b],
            Representation::Dense(e) => e.cosine(a, b).as_f64(),
        }
    }

    /// Mean similarity from `w` to all other words; unreachable words are left out.
    fn mean_similarity(&self, w: usize) -> f64 {
        let (mut sum, mut count) = (0.0, 0usize);
        for v in (0..self.n_words).filter(|&v| v != w) {
            let s = self.similarity(w, v);
            if s.is_finite() {
                sum += s;
                count += 1;
            }
        }
        if count == 0 {
            f64::NEG_INFINITY
        } else {
            sum / count as f64
        }
    }
}

pub fn similarity_eval<T: Scalar>(
    rep: Representation<'_, T>,
    vocab: &Vocabulary,
    bench: &SimilarityBenchmark,
    policy: OovPolicy,
) -> Result<SimilarityResult> {
    rep.check_vocab(vocab)?;
    let lookup = |w: &str| vocab.id(w).or_else(|| vocab.id(&w.to_lowercase()));
    let ids: Vec<(Option<usize>, Option<usize>)> =
        bench.pairs.iter().map(|(a, b, _)| (lookup(a), lookup(b))).collect();
    let known: Vec<usize> = ids.iter().flat_map(|&(a, b)| a.into_iter().chain(b)).collect();
    let scorer = Scorer::new(rep, vocab.len(), &known)?;

    let mut model = Vec::new();
    let mut human = Vec::new();
    let (mut skipped, mut inferred) = (0, 0);
    let mut mean_cache: HashMap<usize, f64> = HashMap::new();
    for (&(a, b), (_, _, score)) in ids.iter().zip(&bench.pairs) {
        let s = match (a, b, policy) {
            (Some(a), Some(b), _) => scorer.similarity(a, b),
            (_, _, OovPolicy::Skip) => {
                skipped += 1;
                continue;
            }
            (Some(w), None, OovPolicy::Infer) | (None, Some(w), OovPolicy::Infer) => {
                inferred += 1;
                *mean_cache.entry(w).or_insert_with(|| scorer.mean_similarity(w))
            }
            (None, None, OovPolicy::Infer) => {
                inferred += 1;
                f64::NEG_INFINITY
            }
        };
        model.push(s);
        human.push(*score);
    }
    if model.is_empty() {
        return Err(Error::Empty(format!("no usable pairs in {}", bench.name)));
    }
    let rho = spearman(&model, &human)?;
    Ok(SimilarityResult { benchmark: bench.name.clone(), spearman: rho, attempted: model.len(), skipped, inferred })
}

/// Distances from `x` to every word, with unreachable entries set to the
/// largest finite distance plus one.
pub fn distance_profile<T: Scalar>(graph: &PrunedGraph<T>, n_words: usize, x: usize) -> Result<Vec<f64>> {
    if n_words > graph.n_vertices() {
        return Err(Error::invalid("n_words", "more words than graph vertices"));
    }
    if x >= n_words {
        return Err(Error::VertexOutOfRange { vertex: x, n_vertices: n_words });
    }
    let sp = shortest_paths(graph, x, None)?;
    let mut d: Vec<f64> = (0..n_words).map(|v| sp.distance(v).as_f64()).collect();
    let max_finite = d.iter().copied().filter(|v| v.is_finite()).fold(0.0, f64::max);
    let mut replaced = 0;
    for v in d.iter_mut().filter(|v| !v.is_finite()) {
        *v = max_finite + 1.0;
        replaced += 1;
    }
    if replaced > 0 {
        log::debug!("distance profile of {x}: {replaced} unreachable words");
    }
    Ok(d)
}

/// Pearson correlation of the distance profiles of `x` and `y` over word nodes.
pub fn sim_g<T: Scalar>(graph: &PrunedGraph<T>, n_words: usize, x: usize, y: usize) -> Result<f64> {
    let dx = distance_profile(graph, n_words, x)?;
    let dy = if x == y { dx.clone() } else { distance_profile(graph, n_words, y)? };
    pearson(&dx, &dy)
}
