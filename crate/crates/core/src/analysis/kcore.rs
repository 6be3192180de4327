use crate::graph::PrunedGraph;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoreDecomposition {
    /// Core number of every vertex.
    pub core: Vec<usize>,
    /// Largest k with a non-empty k-core.
    pub k_max: usize,
    /// Members of the main core, ascending.
    pub main_core: Vec<usize>,
}

/// Core numbers by repeatedly removing a vertex of minimum remaining degree
/// (bucket queue, O(|V| + |E|)).
pub fn k_core<T: Scalar>(graph: &PrunedGraph<T>) -> CoreDecomposition {
    let n = graph.n_vertices();
    let mut degree: Vec<usize> = (0..n).map(|v| graph.degree(v)).collect();
    let max_deg = degree.iter().copied().max().unwrap_or(0);
    // Vertices sorted by degree with bucket starts, as in Batagelj–Zaversnik.
    let mut bin = vec![0usize; max_deg + 2];
    for &d in &degree {
        bin[d + 1] += 1;
    }
    for d in 1..bin.len() {
        bin[d] += bin[d - 1];
    }
    let mut pos = vec![0usize; n];
    let mut order = vec![0usize; n];
    let mut next = bin.clone();
    for v in 0..n {
        pos[v] = next[degree[v]];
        order[pos[v]] = v;
        next[degree[v]] += 1;
    }
    for i in 0..n {
        let v = order[i];
        for &(u, _) in graph.neighbors(v) {
            let u = u as usize;
            if degree[u] > degree[v] {
                // Move u to the front of its bucket, then shrink its degree.
                let du = degree[u];
                let first = bin[du];
                let w = order[first];
                if w != u {
                    order.swap(pos[u], first);
                    pos[w] = pos[u];
                    pos[u] = first;
                }
                bin[du] += 1;
                degree[u] -= 1;
            }
        }
    }
    let k_max = degree.iter().copied().max().unwrap_or(0);
    let main_core = (0..n).filter(|&v| degree[v] == k_max).collect();
    CoreDecomposition { core: degree, k_max, main_core }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit(n: usize, edges: &[(usize, usize)]) -> PrunedGraph<f64> {
        PrunedGraph::new(n, edges.iter().map(|&(a, b)| (a, b, 1.0))).unwrap()
    }

    /// Core number of v = largest k such that v survives repeated deletion of
    /// all vertices with degree < k.
    fn peeling_oracle(n: usize, edges: &[(usize, usize)]) -> Vec<usize> {
        let mut core = vec![0; n];
        for k in 1..=n {
            let mut alive = vec![true; n];
            loop {
                let deg: Vec<usize> = (0..n)
                    .map(|v| edges.iter().filter(|&&(a, b)| (a == v && alive[b]) || (b == v && alive[a])).count())
                    .collect();
                let drop: Vec<usize> = (0..n).filter(|&v| alive[v] && deg[v] < k).collect();
                if drop.is_empty() {
                    break;
                }
                for v in drop {
                    alive[v] = false;
                }
            }
            for v in 0..n {
                if alive[v] {
                    core[v] = k;
                }
            }
        }
        core
    }

    #[test]
    fn examples() {
        let k4 = unit(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        let d = k_core(&k4);
        assert_eq!((d.k_max, d.main_core), (3, vec![0, 1, 2, 3]));

        let tri = unit(4, &[(0, 1), (1, 2), (0, 2), (2, 3)]);
        let d = k_core(&tri);
        assert_eq!(d.core, vec![2, 2, 2, 1]);
        assert_eq!((d.k_max, d.main_core.len()), (2, 3));

        let tree = crate::synthetic::random_tree(25, 1).unwrap();
        assert_eq!(k_core(&tree).k_max, 1);
        assert_eq!(k_core(&unit(3, &[])).k_max, 0);
    }

    proptest! {
        #[test]
        fn matches_peeling_oracle(n in 1usize..30, raw in prop::collection::vec((0usize..30, 0usize..30), 0..80)) {
            let mut edges: Vec<(usize, usize)> = raw
                .into_iter()
                .map(|(a, b)| (a % n, b % n))
                .filter(|(a, b)| a != b)
                .map(|(a, b)| (a.min(b), a.max(b)))
                .collect();
            edges.sort_unstable();
            edges.dedup();
            let d = k_core(&unit(n, &edges));
            prop_assert_eq!(&d.core, &peeling_oracle(n, &edges));
            prop_assert!(d.main_core.iter().all(|&v| d.core[v] == d.k_max));
        }
    }
}
