use std::collections::{HashSet, VecDeque};

use super::paths::shortest_paths;
use super::WeightedGraph;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Deterministic undirected weighted graph.
#[derive(Debug, Clone, PartialEq)]
pub struct PrunedGraph<T> {
    n_vertices: usize,
    zero_node: Option<usize>,
    edges: Vec<(u32, u32, T)>,
    adjacency: Vec<Vec<(u32, u32)>>,
}

impl<T: Scalar> PrunedGraph<T> {
    /// Builds a graph from undirected edges. Endpoints are canonicalized to
    /// `u < v`; self-loops, duplicates and negative or non-finite weights are
    /// rejected.
    pub fn new(n_vertices: usize, edges: impl IntoIterator<Item = (usize, usize, T)>) -> Result<Self> {
        let mut out = Vec::new();
        let mut seen = HashSet::new();
        for (a, b, w) in edges {
            if a >= n_vertices || b >= n_vertices {
                return Err(Error::VertexOutOfRange { vertex: a.max(b), n_vertices });
            }
            if a == b {
                return Err(Error::invalid("edges", format!("self-loop at {a}")));
            }
            if !(w >= T::zero() && w.is_finite()) {
                return Err(Error::invalid("edges", format!("edge ({a}, {b}) has weight {w}")));
            }
            let (u, v) = if a < b { (a, b) } else { (b, a) };
            if !seen.insert((u, v)) {
                return Err(Error::invalid("edges", format!("duplicate edge ({u}, {v})")));
            }
            out.push((u as u32, v as u32, w));
        }
        let mut adjacency: Vec<Vec<(u32, u32)>> = vec![Vec::new(); n_vertices];
        for (e, &(u, v, _)) in out.iter().enumerate() {
            adjacency[u as usize].push((v, e as u32));
            adjacency[v as usize].push((u, e as u32));
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(PrunedGraph { n_vertices, zero_node: None, edges: out, adjacency })
    }

    /// Marks `zero` as the auxiliary origin vertex used by [`graph_dot`].
    pub fn with_zero_node(mut self, zero: usize) -> Result<Self> {
        if zero >= self.n_vertices {
            return Err(Error::VertexOutOfRange { vertex: zero, n_vertices: self.n_vertices });
        }
        self.zero_node = Some(zero);
        Ok(self)
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn zero_node(&self) -> Option<usize> {
        self.zero_node
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(u32, u32, T)] {
        &self.edges
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    /// `(neighbor, edge index)` pairs sorted by neighbor.
    pub fn neighbors(&self, v: usize) -> &[(u32, u32)] {
        &self.adjacency[v]
    }

    pub fn weight(&self, edge: usize) -> T {
        self.edges[edge].2
    }

    /// Copy with every weight multiplied by `factor`.
    pub fn scaled(&self, factor: T) -> Self {
        let mut g = self.clone();
        for e in &mut g.edges {
            e.2 *= factor;
        }
        g
    }

    /// Subgraph on `nodes` (in the given order); returns it with the map from
    /// new ids back to original ids.
    pub fn induced_subgraph(&self, nodes: &[usize]) -> (Self, Vec<usize>) {
        let mut local = vec![usize::MAX; self.n_vertices];
        for (i, &v) in nodes.iter().enumerate() {
            local[v] = i;
        }
        let edges = self.edges.iter().filter_map(|&(u, v, w)| {
            let (a, b) = (local[u as usize], local[v as usize]);
            (a != usize::MAX && b != usize::MAX).then_some((a, b, w))
        });
        let mut g = PrunedGraph::new(nodes.len(), edges).expect("subgraph of a valid graph is valid");
        g.zero_node = self.zero_node.and_then(|z| (local[z] != usize::MAX).then_some(local[z]));
        (g, nodes.to_vec())
    }

    /// Connected components, each sorted, ordered by smallest member.
    pub fn connected_components(&self) -> Vec<Vec<usize>> {
        let mut comp = vec![usize::MAX; self.n_vertices];
        let mut out = Vec::new();
        let mut queue = VecDeque::new();
        for s in 0..self.n_vertices {
            if comp[s] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut members = vec![s];
            comp[s] = id;
            queue.push_back(s);
            while let Some(u) = queue.pop_front() {
                for &(v, _) in &self.adjacency[u] {
                    let v = v as usize;
                    if comp[v] == usize::MAX {
                        comp[v] = id;
                        members.push(v);
                        queue.push_back(v);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    /// Largest connected component; ties go to the one with the smallest member.
    pub fn largest_component(&self) -> Vec<usize> {
        self.connected_components()
            .into_iter()
            .fold(Vec::new(), |best, c| if c.len() > best.len() { c } else { best })
    }

    /// Unweighted hop counts from `source`; `None` for unreachable vertices.
    pub fn bfs_levels(&self, source: usize) -> Vec<Option<usize>> {
        let mut level = vec![None; self.n_vertices];
        level[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let next = level[u].map(|l| l + 1);
            for &(v, _) in &self.adjacency[u] {
                if level[v as usize].is_none() {
                    level[v as usize] = next;
                    queue.push_back(v as usize);
                }
            }
        }
        level
    }

    /// All-pairs distances, one Dijkstra per vertex.
    pub fn all_pairs(&self) -> Vec<Vec<T>> {
        use rayon::prelude::*;
        (0..self.n_vertices)
            .into_par_iter()
            .map(|s| shortest_paths(self, s, None).expect("source in range").distances())
            .collect()
    }
}

impl<T: Scalar> WeightedGraph<T> for PrunedGraph<T> {
    fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    fn for_each_neighbor<F: FnMut(usize, T, usize)>(&self, v: usize, mut f: F) {
        for &(u, e) in &self.adjacency[v] {
            f(u as usize, self.edges[e as usize].2, e as usize);
        }
    }
}

/// Graph dot product `½(d²(i,0) + d²(j,0) − d²(i,j))` through the zero node.
pub fn graph_dot<T: Scalar>(graph: &PrunedGraph<T>, i: usize, j: usize) -> Result<T> {
    let zero = graph
        .zero_node()
        .ok_or_else(|| Error::invalid("graph", "graph has no zero node"))?;
    for &v in &[i, j] {
        if v >= graph.n_vertices() {
            return Err(Error::VertexOutOfRange { vertex: v, n_vertices: graph.n_vertices() });
        }
    }
    let from_zero = shortest_paths(graph, zero, Some(&[i, j]))?;
    let (di, dj) = (from_zero.distance(i), from_zero.distance(j));
    if !di.is_finite() {
        return Err(Error::Unreachable { from: i, to: zero });
    }
    if !dj.is_finite() {
        return Err(Error::Unreachable { from: j, to: zero });
    }
    let dij = shortest_paths(graph, i, Some(&[j]))?.distance(j);
    let half = T::of(0.5);
    Ok(half * (di * di + dj * dj - dij * dij))
}

/// `(|V| + 2|E|) / |V|`, the per-token parameter count of a graph model.
pub fn parameters_per_token<T: Scalar>(graph: &PrunedGraph<T>, vocab_size: usize) -> Result<f64> {
    if vocab_size == 0 {
        return Err(Error::invalid("vocab_size", "must be positive"));
    }
    Ok(ppt(vocab_size, graph.n_edges()))
}

pub(crate) fn ppt(vocab_size: usize, n_edges: usize) -> f64 {
    (vocab_size as f64 + 2.0 * n_edges as f64) / vocab_size as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn g(n: usize, edges: &[(usize, usize, f64)]) -> PrunedGraph<f64> {
        PrunedGraph::new(n, edges.iter().copied()).unwrap()
    }

    #[test]
    fn chain_distance_and_path() {
        let graph = g(3, &[(0, 1, 1.0), (1, 2, 2.0)]);
        let sp = shortest_paths(&graph, 0, None).unwrap();
        assert_eq!(sp.distance(2), 3.0);
        assert_eq!(sp.path_vertices(2).unwrap(), vec![0, 1, 2]);
        assert_eq!(sp.path_edges(2).unwrap(), vec![1, 0]);
    }

    #[test]
    fn square_takes_cheaper_side() {
        // a=0 b=1 c=2 d=3
        let graph = g(4, &[(0, 1, 1.0), (1, 2, 1.0), (0, 3, 5.0), (3, 2, 1.0)]);
        let sp = shortest_paths(&graph, 0, Some(&[2])).unwrap();
        assert_eq!(sp.distance(2), 2.0);
        assert_eq!(floyd_warshall(&graph)[0][2], 2.0);
    }

    #[test]
    fn disconnected_is_infinite() {
        let graph = g(3, &[(0, 1, 1.0)]);
        let sp = shortest_paths(&graph, 0, Some(&[2])).unwrap();
        assert_eq!(sp.distance(2), f64::INFINITY);
        assert!(sp.path_edges(2).is_none());
    }

    #[test]
    fn rejects_bad_vertices_and_edges() {
        let graph = g(3, &[(0, 1, 1.0)]);
        assert!(matches!(shortest_paths(&graph, 3, None), Err(Error::VertexOutOfRange { vertex: 3, .. })));
        assert!(shortest_paths(&graph, 0, Some(&[7])).is_err());
        assert!(PrunedGraph::new(2, [(0, 0, 1.0)]).is_err());
        assert!(PrunedGraph::new(2, [(0, 1, 1.0), (1, 0, 2.0)]).is_err());
        assert!(PrunedGraph::new(2, [(0, 1, -1.0)]).is_err());
        assert!(PrunedGraph::new(2, [(0, 1, f64::NAN)]).is_err());
    }

    #[test]
    fn early_exit_settles_targets_exactly() {
        let graph = g(5, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 4, 1.0)]);
        let sp = shortest_paths(&graph, 0, Some(&[1])).unwrap();
        assert_eq!(sp.distance(1), 1.0);
        assert!(!sp.is_settled(4));
        assert_eq!(sp.settled_order(), &[0, 1]);
    }

    #[test]
    fn dot_product_examples() {
        // zero node 0, a=1, b=2
        let graph = g(3, &[(0, 1, 1.0), (1, 2, 2.0)]).with_zero_node(0).unwrap();
        assert_eq!(graph_dot(&graph, 1, 2).unwrap(), 3.0);
        assert_eq!(graph_dot(&graph, 2, 1).unwrap(), 3.0);
        assert_eq!(graph_dot(&graph, 2, 2).unwrap(), 9.0);
        assert_eq!(graph_dot(&graph, 0, 2).unwrap(), 0.0);
        let cut = g(3, &[(0, 1, 1.0)]).with_zero_node(0).unwrap();
        assert!(matches!(graph_dot(&cut, 1, 2), Err(Error::Unreachable { from: 2, .. })));
        assert!(graph_dot(&g(2, &[(0, 1, 1.0)]), 0, 1).is_err());
    }

    #[test]
    fn parameters_per_token_examples() {
        assert_eq!(ppt(50_000, 475_000), 20.0);
        assert_eq!(ppt(10, 0), 1.0);
        let complete: Vec<_> = (0..10).flat_map(|i| (i + 1..10).map(move |j| (i, j, 1.0))).collect();
        assert_eq!(parameters_per_token(&g(10, &complete), 10).unwrap(), 10.0);
        assert!(parameters_per_token(&g(10, &complete), 0).is_err());
    }

    #[test]
    fn components_and_bfs() {
        let graph = g(6, &[(0, 1, 1.0), (1, 2, 1.0), (3, 4, 1.0)]);
        assert_eq!(graph.connected_components(), vec![vec![0, 1, 2], vec![3, 4], vec![5]]);
        assert_eq!(graph.largest_component(), vec![0, 1, 2]);
        assert_eq!(graph.bfs_levels(0), vec![Some(0), Some(1), Some(2), None, None, None]);
        let (sub, map) = graph.induced_subgraph(&[4, 3, 5]);
        assert_eq!(sub.n_edges(), 1);
        assert_eq!(map, vec![4, 3, 5]);
    }

    pub(crate) fn floyd_warshall(graph: &PrunedGraph<f64>) -> Vec<Vec<f64>> {
        let n = graph.n_vertices();
        let mut d = vec![vec![f64::INFINITY; n]; n];
        for (i, row) in d.iter_mut().enumerate() {
            row[i] = 0.0;
        }
        for &(u, v, w) in graph.edges() {
            let (u, v) = (u as usize, v as usize);
            d[u][v] = d[u][v].min(w);
            d[v][u] = d[v][u].min(w);
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let via = d[i][k] + d[k][j];
                    if via < d[i][j] {
                        d[i][j] = via;
                    }
                }
            }
        }
        d
    }

    fn random_graph(n: usize, density: f64, seed: u64) -> PrunedGraph<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.random_bool(density) {
                    // Small integer weights keep every sum exact and create ties.
                    edges.push((i, j, rng.random_range(1..6) as f64));
                }
            }
        }
        PrunedGraph::new(n, edges).unwrap()
    }

    proptest! {
        #[test]
        fn dijkstra_matches_floyd_warshall(n in 1usize..40, density in 0.02f64..0.5, seed in any::<u64>()) {
            let graph = random_graph(n, density, seed);
            let fw = floyd_warshall(&graph);
            for s in 0..n {
                let sp = shortest_paths(&graph, s, None).unwrap();
                for t in 0..n {
                    prop_assert_eq!(sp.distance(t), fw[s][t]);
                    if let Some(path) = sp.path_edges(t) {
                        let len: f64 = path.iter().map(|&e| graph.weight(e)).sum();
                        prop_assert_eq!(len, fw[s][t]);
                    }
                }
            }
        }

        #[test]
        fn distance_is_a_metric(n in 2usize..30, seed in any::<u64>()) {
            let graph = random_graph(n, 0.2, seed);
            let d = graph.all_pairs();
            for i in 0..n {
                prop_assert_eq!(d[i][i], 0.0);
                for j in 0..n {
                    prop_assert_eq!(d[i][j], d[j][i]);
                    for k in 0..n {
                        if d[i][k].is_finite() && d[k][j].is_finite() {
                            prop_assert!(d[i][j] <= d[i][k] + d[k][j]);
                        }
                    }
                }
            }
        }

        #[test]
        fn deleting_an_edge_never_shortens(n in 2usize..25, seed in any::<u64>(), pick in any::<prop::sample::Index>()) {
            let graph = random_graph(n, 0.3, seed);
            prop_assume!(graph.n_edges() > 0);
            let drop = pick.index(graph.n_edges());
            let kept = graph.edges().iter().enumerate().filter(|&(e, _)| e != drop)
                .map(|(_, &(u, v, w))| (u as usize, v as usize, w));
            let smaller = PrunedGraph::new(n, kept).unwrap();
            let (before, after) = (graph.all_pairs(), smaller.all_pairs());
            for i in 0..n {
                for j in 0..n {
                    prop_assert!(after[i][j] >= before[i][j]);
                }
            }
        }

        #[test]
        fn dot_product_is_symmetric(n in 3usize..20, seed in any::<u64>()) {
            let graph = random_graph(n, 0.4, seed).with_zero_node(n - 1).unwrap();
            let reach = graph.bfs_levels(n - 1);
            for i in 0..n {
                for j in 0..n {
                    if reach[i].is_some() && reach[j].is_some() {
                        prop_assert_eq!(graph_dot(&graph, i, j).unwrap(), graph_dot(&graph, j, i).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn works_for_f32() {
        let graph = PrunedGraph::<f32>::new(3, [(0, 1, 1.5f32), (1, 2, 0.25)]).unwrap();
        assert_eq!(shortest_paths(&graph, 0, None).unwrap().distance(2), 1.75f32);
    }
}
