use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::graph::PrunedGraph;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct CentralityEntry {
    pub rank: usize,
    pub word: usize,
    pub score: f64,
    /// 100 for the most frequent word, 0 for the least frequent.
    pub freq_percentile: f64,
}

/// Frequency percentile of every word: ties share the average of their
/// positions, scaled so higher means more frequent.
pub fn frequency_percentiles(vocab: &Vocabulary) -> Vec<f64> {
    let freq: Vec<f64> = vocab.freq().iter().map(|&f| f as f64).collect();
    let n = freq.len();
    if n == 1 {
        return vec![100.0];
    }
    crate::eval::average_ranks(&freq).into_iter().map(|r| 100.0 * (r - 1.0) / (n - 1) as f64).collect()
}

/// Words (graph vertices `0..vocab.len()`) by degree descending; ties go to
/// the more frequent word, then the lower id.
pub fn degree_centrality_top<T: Scalar>(
    graph: &PrunedGraph<T>,
    vocab: &Vocabulary,
    top: usize,
) -> Result<Vec<CentralityEntry>> {
    let n = vocab.len();
    if n > graph.n_vertices() {
        return Err(Error::invalid("vocab", "more words than graph vertices"));
    }
    if top > n {
        return Err(Error::invalid("top", format!("{top} exceeds the {n} words")));
    }
    let freq = vocab.freq();
    let pct = frequency_percentiles(vocab);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        graph.degree(b).cmp(&graph.degree(a)).then(freq[b].cmp(&freq[a])).then(a.cmp(&b))
    });
    Ok(order
        .into_iter()
        .take(top)
        .enumerate()
        .map(|(r, w)| CentralityEntry { rank: r + 1, word: w, score: graph.degree(w) as f64, freq_percentile: pct[w] })
        .collect())
}

/// Words by `scores[word]` descending, with the same tie-breaks as
/// [`degree_centrality_top`].
pub fn score_top(scores: &[f64], vocab: &Vocabulary, top: usize) -> Result<Vec<CentralityEntry>> {
    let n = vocab.len();
    if n > scores.len() {
        return Err(Error::invalid("vocab", "more words than scores"));
    }
    if top > n {
        return Err(Error::invalid("top", format!("{top} exceeds the {n} words")));
    }
    let freq = vocab.freq();
    let pct = frequency_percentiles(vocab);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(freq[b].cmp(&freq[a])).then(a.cmp(&b)));
    Ok(order
        .into_iter()
        .take(top)
        .enumerate()
        .map(|(r, w)| CentralityEntry { rank: r + 1, word: w, score: scores[w], freq_percentile: pct[w] })
        .collect())
}

/// Principal eigenvector of the binary adjacency matrix on the largest
/// connected component, non-negative with unit L2 norm; other vertices
/// score 0.
///
/// Iterates with `A + I`, which has the same eigenvectors and a dominant
/// eigenvalue that is strictly largest in magnitude even on bipartite graphs.
pub fn eigenvector_centrality<T: Scalar>(graph: &PrunedGraph<T>, tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    let n = graph.n_vertices();
    if n == 0 {
        return Err(Error::Empty("graph has no vertices".into()));
    }
    if !(tol > 0.0) || max_iter == 0 {
        return Err(Error::invalid("tol", "tol and max_iter must be positive"));
    }
    let comp = graph.largest_component();
    let mut x = vec![0.0; n];
    let init = 1.0 / (comp.len() as f64).sqrt();
    for &v in &comp {
        x[v] = init;
    }
    let mut residual = f64::INFINITY;
    for _ in 0..max_iter {
        let mut y = vec![0.0; n];
        for &v in &comp {
            let mut s = x[v];
            for &(u, _) in graph.neighbors(v) {
                s += x[u as usize];
            }
            y[v] = s;
        }
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        for v in &mut y {
            *v /= norm;
        }
        residual = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        x = y;
        if residual < tol {
            return Ok(x);
        }
    }
    Err(Error::NotConverged { iterations: max_iter, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn vocab(freqs: &[u64]) -> Vocabulary {
        Vocabulary::from_counts(freqs.iter().enumerate().map(|(i, &f)| (format!("w{i:02}"), f)), freqs.len())
    }

    fn unit(n: usize, edges: &[(usize, usize)]) -> PrunedGraph<f64> {
        PrunedGraph::new(n, edges.iter().map(|&(a, b)| (a, b, 1.0))).unwrap()
    }

    fn clique(offset: usize, k: usize) -> Vec<(usize, usize)> {
        (0..k).flat_map(|i| (i + 1..k).map(move |j| (offset + i, offset + j))).collect()
    }

    #[test]
    fn star_center_ranks_first() {
        let g = unit(6, &[(3, 0), (3, 1), (3, 2), (3, 4), (3, 5)]);
        let top = degree_centrality_top(&g, &vocab(&[60, 50, 40, 30, 20, 10]), 2).unwrap();
        assert_eq!((top[0].word, top[0].score), (3, 5.0));
        assert_eq!(top[1].word, 0);
        assert_eq!(top[0].freq_percentile, 40.0);
        let e = eigenvector_centrality(&g, 1e-12, 10_000).unwrap();
        assert!((0..6).filter(|&v| v != 3).all(|v| e[3] > e[v]));
        // Closed form: centre 1/√2, leaves 1/√(2·5).
        assert!((e[3] - 0.5f64.sqrt()).abs() < 1e-9);
        assert!((e[0] - 0.1f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn regular_graph_breaks_ties_by_frequency() {
        let g = unit(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        let v = Vocabulary::from_counts([("a".into(), 5), ("b".into(), 9), ("c".into(), 9), ("d".into(), 1)], 4);
        let top = degree_centrality_top(&g, &v, 4).unwrap();
        let words: Vec<&str> = top.iter().map(|e| v.token(e.word)).collect();
        assert_eq!(words, vec!["b", "c", "a", "d"]);
        assert!(degree_centrality_top(&g, &v, 5).is_err());
    }

    #[test]
    fn matches_sort_oracle() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let n = 50;
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.random_bool(0.1) {
                    edges.push((i, j));
                }
            }
        }
        let g = unit(n, &edges);
        let freqs: Vec<u64> = (0..n).map(|_| rng.random_range(1..8)).collect();
        let v = Vocabulary::from_counts(freqs.iter().enumerate().map(|(i, &f)| (format!("t{i:02}"), f)), n);
        let top = degree_centrality_top(&g, &v, n).unwrap();
        let mut keys: Vec<(i64, i64, usize)> =
            (0..n).map(|w| (-(g.degree(w) as i64), -(v.freq()[w] as i64), w)).collect();
        keys.sort();
        assert_eq!(top.iter().map(|e| e.word).collect::<Vec<_>>(), keys.iter().map(|k| k.2).collect::<Vec<_>>());
    }

    #[test]
    fn complete_graph_is_uniform() {
        let g = unit(7, &clique(0, 7));
        let e = eigenvector_centrality(&g, 1e-12, 100).unwrap();
        assert!(e.iter().all(|&s| (s - 1.0 / 7f64.sqrt()).abs() < 1e-12));
    }

    #[test]
    fn restricted_to_largest_component() {
        let mut edges = clique(0, 4);
        edges.extend(clique(4, 3));
        let g = unit(7, &edges);
        let e = eigenvector_centrality(&g, 1e-12, 1000).unwrap();
        assert!(e[..4].iter().all(|&s| (s - 0.5).abs() < 1e-12));
        assert!(e[4..].iter().all(|&s| s == 0.0));
    }

    #[test]
    fn score_top_orders_by_score() {
        let v = vocab(&[5, 5, 1, 9]);
        let top = score_top(&[0.2, 0.7, 0.7, 0.1], &v, 3).unwrap();
        let words: Vec<usize> = top.iter().map(|e| e.word).collect();
        // Word ids follow frequency: 0 ↔ 9, 1 ↔ 5 (w00), 2 ↔ 5 (w01), 3 ↔ 1.
        assert_eq!(words, vec![1, 2, 0]);
        assert!(score_top(&[0.0; 4], &v, 5).is_err());
    }

    #[test]
    fn eigen_equation_holds() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            let n = 30;
            let mut edges: Vec<(usize, usize)> = (1..n).map(|i| (rng.random_range(0..i), i)).collect();
            for _ in 0..20 {
                let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
                if a < b {
                    edges.push((a, b));
                }
            }
            let mut edges = edges;
            edges.sort_unstable();
            edges.dedup();
            let g = unit(n, &edges);
            let tol = 1e-10;
            let s = eigenvector_centrality(&g, tol, 100_000).unwrap();
            let a_s: Vec<f64> = (0..n).map(|v| g.neighbors(v).iter().map(|&(u, _)| s[u as usize]).sum()).collect();
            let lambda: f64 = a_s.iter().zip(&s).map(|(a, b)| a * b).sum();
            let resid = a_s.iter().zip(&s).map(|(a, b)| (a - lambda * b).abs()).fold(0.0, f64::max);
            assert!(resid < tol * 10.0 * (lambda + 1.0), "{resid}");
            assert!(s.iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn non_convergence_reports_residual() {
        let g = unit(30, &(1..30).map(|i| (i - 1, i)).collect::<Vec<_>>());
        match eigenvector_centrality(&g, 1e-15, 3) {
            Err(Error::NotConverged { iterations: 3, residual }) => assert!(residual > 0.0),
            other => panic!("{other:?}"),
        }
    }
}
