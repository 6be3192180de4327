use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{shortest_paths, PrunedGraph};
use crate::scalar::Scalar;

/// Components up to this size are enumerated exhaustively.
pub const EXACT_LIMIT: usize = 12;
/// Components up to this size get a full distance matrix; larger ones sample
/// quadruples from a pool of `POOL_SIZE` vertices.
pub const MATRIX_LIMIT: usize = 4000;
pub const POOL_SIZE: usize = 1000;
pub const DEFAULT_SAMPLES: usize = 100_000;
pub const MIN_CLUSTER_SIZE: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyperbolicity {
    pub mean_delta: f64,
    /// `mean_delta` over the mean distance of the pairs inside the quadruples.
    pub normalized_delta: f64,
    pub quadruples: usize,
    pub component_size: usize,
    pub exact: bool,
}

/// Four-point δ: half the gap between the two largest pair sums.
pub fn quadruple_delta(dxy: f64, dzt: f64, dxz: f64, dyt: f64, dxt: f64, dyz: f64) -> f64 {
    let mut s = [dxy + dzt, dxz + dyt, dxt + dyz];
    s.sort_unstable_by(|a, b| b.total_cmp(a));
    (s[0] - s[1]) / 2.0
}

struct Distances {
    n: usize,
    d: Vec<f64>,
}

impl Distances {
    fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }

    /// `(δ, sum of the six pair distances)`
    fn quad(&self, q: [usize; 4]) -> (f64, f64) {
        let [x, y, z, t] = q;
        let (xy, zt, xz, yt, xt, yz) =
            (self.get(x, y), self.get(z, t), self.get(x, z), self.get(y, t), self.get(x, t), self.get(y, z));
        (quadruple_delta(xy, zt, xz, yt, xt, yz), xy + zt + xz + yt + xt + yz)
    }
}

/// Distances among `rows` of `graph`, all of which lie in one component.
fn distance_matrix<T: Scalar>(graph: &PrunedGraph<T>, rows: &[usize]) -> Distances {
    let n = rows.len();
    let d: Vec<Vec<f64>> = rows
        .par_iter()
        .map(|&s| {
            let sp = shortest_paths(graph, s, Some(rows)).expect("source in range");
            rows.iter().map(|&t| sp.distance(t).as_f64()).collect()
        })
        .collect();
    Distances { n, d: d.concat() }
}

/// δ-hyperbolicity of the largest connected component. Components of at most
/// `EXACT_LIMIT` vertices are enumerated; otherwise `samples` quadruples of
/// distinct vertices are drawn with the seeded generator.
pub fn gromov_delta<T: Scalar>(graph: &PrunedGraph<T>, samples: usize, seed: u64) -> Result<Hyperbolicity> {
    let comp = graph.largest_component();
    let size = comp.len();
    if size < 4 {
        return Err(Error::invalid("graph", format!("largest component has {size} vertices, need at least 4")));
    }
    if size <= EXACT_LIMIT {
        let dist = distance_matrix(graph, &comp);
        let mut delta = 0.0;
        let mut count = 0usize;
        for x in 0..size {
            for y in x + 1..size {
                for z in y + 1..size {
                    for t in z + 1..size {
                        delta += dist.quad([x, y, z, t]).0;
                        count += 1;
                    }
                }
            }
        }
        let pairs: f64 = (0..size).flat_map(|i| (i + 1..size).map(move |j| (i, j))).map(|(i, j)| dist.get(i, j)).sum();
        let mean_delta = delta / count as f64;
        let mean_dist = pairs / (size * (size - 1) / 2) as f64;
        return Ok(Hyperbolicity {
            mean_delta,
            normalized_delta: normalize(mean_delta, mean_dist),
            quadruples: count,
            component_size: size,
            exact: true,
        });
    }
    if samples == 0 {
        return Err(Error::invalid("samples", "must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pool: Vec<usize> = if size <= MATRIX_LIMIT {
        comp
    } else {
        let mut p: Vec<usize> = index::sample(&mut rng, size, POOL_SIZE).into_iter().map(|i| comp[i]).collect();
        p.sort_unstable();
        p
    };
    let dist = distance_matrix(graph, &pool);
    let quads: Vec<[usize; 4]> = (0..samples)
        .map(|_| {
            let q = index::sample(&mut rng, pool.len(), 4);
            [q.index(0), q.index(1), q.index(2), q.index(3)]
        })
        .collect();
    let per_quad: Vec<(f64, f64)> = quads.par_iter().map(|&q| dist.quad(q)).collect();
    let (delta, pair_sum) = per_quad.iter().fold((0.0, 0.0), |acc, &(d, s)| (acc.0 + d, acc.1 + s));
    let mean_delta = delta / samples as f64;
    let mean_dist = pair_sum / (6 * samples) as f64;
    Ok(Hyperbolicity {
        mean_delta,
        normalized_delta: normalize(mean_delta, mean_dist),
        quadruples: samples,
        component_size: size,
        exact: false,
    })
}

fn normalize(mean_delta: f64, mean_dist: f64) -> f64 {
    if mean_dist > 0.0 {
        mean_delta / mean_dist
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterHyperbolicity {
    pub cluster_id: usize,
    pub size: usize,
    pub mean_delta: f64,
    pub normalized_delta: f64,
}

/// δ of every cluster with at least `min_size` members, measured on the
/// largest component of the subgraph the cluster induces. Cluster `c` uses
/// seed `seed + c`.
pub fn cluster_hyperbolicity<T: Scalar>(
    graph: &PrunedGraph<T>,
    clusters: &[Vec<usize>],
    min_size: usize,
    samples: usize,
    seed: u64,
) -> Vec<ClusterHyperbolicity> {
    clusters
        .par_iter()
        .enumerate()
        .filter(|(_, members)| members.len() >= min_size.max(4))
        .filter_map(|(id, members)| {
            let (sub, _) = graph.induced_subgraph(members);
            gromov_delta(&sub, samples, seed.wrapping_add(id as u64)).ok().map(|h| ClusterHyperbolicity {
                cluster_id: id,
                size: members.len(),
                mean_delta: h.mean_delta,
                normalized_delta: h.normalized_delta,
            })
        })
        .collect()
}
