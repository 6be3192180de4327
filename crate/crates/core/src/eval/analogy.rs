use rayon::prelude::*;

use super::benchmarks::AnalogyBenchmark;
use super::similarity::{distance_profile, Representation};
use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct CategoryAccuracy {
    pub name: String,
    pub correct: usize,
    pub attempted: usize,
    pub skipped: usize,
}

impl CategoryAccuracy {
    pub fn accuracy(&self) -> f64 {
        if self.attempted == 0 {
            0.0
        } else {
            self.correct as f64 / self.attempted as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalogyResult {
    pub benchmark: String,
    pub correct: usize,
    pub attempted: usize,
    /// Questions with an out-of-vocabulary word.
    pub skipped: usize,
    pub categories: Vec<CategoryAccuracy>,
}

impl AnalogyResult {
    pub fn accuracy(&self) -> f64 {
        if self.attempted == 0 {
            0.0
        } else {
            self.correct as f64 / self.attempted as f64
        }
    }
}

/// Rows whose dot products are the similarities used for 3CosAdd: unit
/// vectors for dense models, standardized distance profiles scaled by
/// `1/√n` for graphs (so the dot product is the Pearson correlation).
pub struct SimilarityRows {
    dim: usize,
    data: Vec<f64>,
}

impl SimilarityRows {
    pub fn build<T: Scalar>(rep: Representation<'_, T>, n_words: usize) -> Result<Self> {
        match rep {
            Representation::Dense(e) => {
                let dim = e.dim();
                let mut data = Vec::with_capacity(n_words * dim);
                for i in 0..n_words {
                    let v: Vec<f64> = e.vector(i).iter().map(|x| x.as_f64()).collect();
                    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                    let inv = if norm > 0.0 { 1.0 / norm } else { 0.0 };
                    data.extend(v.iter().map(|x| x * inv));
                }
                Ok(SimilarityRows { dim, data })
            }
            Representation::Graph(g) => {
                let rows: Vec<Vec<f64>> = (0..n_words)
                    .into_par_iter()
                    .map(|w| {
                        let d = distance_profile(g, n_words, w)?;
                        standardize(d).ok_or_else(|| Error::Numerical(format!("word {w} has a constant distance profile")))
                    })
                    .collect::<Result<_>>()?;
                Ok(SimilarityRows { dim: n_words, data: rows.concat() })
            }
        }
    }

    pub fn n_rows(&self) -> usize {
        if self.dim == 0 {
            0
        } else {
            self.data.len() / self.dim
        }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn similarity(&self, i: usize, j: usize) -> f64 {
        dot(self.row(i), self.row(j))
    }

    /// 3CosAdd: argmax over `c ∉ {a, a_star, b}` of
    /// `sim(c, a_star) − sim(c, a) + sim(c, b)`; ties go to the lower id.
    pub fn predict(&self, a: usize, a_star: usize, b: usize) -> Option<usize> {
        let target: Vec<f64> = self
            .row(a_star)
            .iter()
            .zip(self.row(a))
            .zip(self.row(b))
            .map(|((s, a), b)| s - a + b)
            .collect();
        let mut best: Option<(usize, f64)> = None;
        for c in 0..self.n_rows() {
            if c == a || c == a_star || c == b {
                continue;
            }
            let score = dot(self.row(c), &target);
            if best.is_none_or(|(_, s)| score > s) {
                best = Some((c, score));
            }
        }
        best.map(|(c, _)| c)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn standardize(mut d: Vec<f64>) -> Option<Vec<f64>> {
    let n = d.len() as f64;
    let mean = d.iter().sum::<f64>() / n;
    let ss = d.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
    if ss == 0.0 {
        return None;
    }
    let inv = 1.0 / ss.sqrt();
    for v in &mut d {
        *v = (*v - mean) * inv;
    }
    Some(d)
}

/// Accuracy of 3CosAdd predictions; a question counts as correct when the
/// prediction is any listed answer. Questions with an OOV `a`, `a_star`, `b`
/// or no in-vocabulary answer are skipped.
pub fn analogy_eval<T: Scalar>(
    rep: Representation<'_, T>,
    vocab: &Vocabulary,
    bench: &AnalogyBenchmark,
) -> Result<AnalogyResult> {
    rep.check_vocab(vocab)?;
    let rows = SimilarityRows::build(rep, vocab.len())?;
    Ok(analogy_eval_rows(&rows, vocab, bench))
}

pub fn analogy_eval_rows(rows: &SimilarityRows, vocab: &Vocabulary, bench: &AnalogyBenchmark) -> AnalogyResult {
    let lookup = |w: &str| vocab.id(w).or_else(|| vocab.id(&w.to_lowercase()));
    // Some(correct) when attempted, None when skipped.
    let outcomes: Vec<Option<bool>> = bench
        .questions
        .par_iter()
        .map(|q| {
            let (a, a_star, b) = (lookup(&q.a)?, lookup(&q.a_star)?, lookup(&q.b)?);
            let answers: Vec<usize> = q.b_star.iter().filter_map(|w| lookup(w)).collect();
            if answers.is_empty() {
                return None;
            }
            let predicted = rows.predict(a, a_star, b);
            Some(predicted.is_some_and(|p| answers.contains(&p)))
        })
        .collect();
    let mut categories: Vec<CategoryAccuracy> = bench
        .categories
        .iter()
        .map(|name| CategoryAccuracy { name: name.clone(), correct: 0, attempted: 0, skipped: 0 })
        .collect();
    for (q, outcome) in bench.questions.iter().zip(outcomes) {
        let c = &mut categories[q.category];
        match outcome {
            Some(ok) => {
                c.attempted += 1;
                c.correct += ok as usize;
            }
            None => c.skipped += 1,
        }
    }
    AnalogyResult {
        benchmark: bench.name.clone(),
        correct: categories.iter().map(|c| c.correct).sum(),
        attempted: categories.iter().map(|c| c.attempted).sum(),
        skipped: categories.iter().map(|c| c.skipped).sum(),
        categories,
    }
}
