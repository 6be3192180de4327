use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::WeightedGraph;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const NO_PARENT: u32 = u32::MAX;

#[derive(Copy, Clone, PartialEq)]
struct State<T> {
    dist: T,
    vertex: u32,
}

impl<T: PartialOrd> Eq for State<T> {}

impl<T: PartialOrd> Ord for State<T> {
    // Reversed for a min-heap; equal distances pop lower ids first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .partial_cmp(&self.dist)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl<T: PartialOrd> PartialOrd for State<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Single-source result: exact distances for settled vertices and a
/// predecessor tree for path recovery.
#[derive(Debug, Clone)]
pub struct ShortestPaths<T> {
    source: usize,
    dist: Vec<T>,
    parent_edge: Vec<u32>,
    parent_vertex: Vec<u32>,
    settled: Vec<bool>,
    order: Vec<u32>,
}

impl<T: Scalar> ShortestPaths<T> {
    pub fn source(&self) -> usize {
        self.source
    }

    /// Exact distance for settled vertices (every reachable requested target),
    /// `+∞` otherwise.
    pub fn distance(&self, v: usize) -> T {
        if self.settled[v] {
            self.dist[v]
        } else {
            T::infinity()
        }
    }

    pub fn is_settled(&self, v: usize) -> bool {
        self.settled[v]
    }

    /// Vertices in the order they were settled, source first.
    pub fn settled_order(&self) -> &[u32] {
        &self.order
    }

    /// Distance to every vertex; unsettled entries are `+∞`.
    pub fn distances(&self) -> Vec<T> {
        (0..self.dist.len()).map(|v| self.distance(v)).collect()
    }

    /// `(parent vertex, edge index)` on the recovered path into `v`.
    pub fn parent(&self, v: usize) -> Option<(usize, usize)> {
        if !self.settled[v] || self.parent_edge[v] == NO_PARENT {
            None
        } else {
            Some((self.parent_vertex[v] as usize, self.parent_edge[v] as usize))
        }
    }

    /// Edge indices of one shortest path from the source to `target`, ordered
    /// from the target back to the source. `None` when unreachable.
    pub fn path_edges(&self, target: usize) -> Option<Vec<usize>> {
        if !self.settled[target] {
            return None;
        }
        let mut edges = Vec::new();
        let mut v = target;
        while let Some((p, e)) = self.parent(v) {
            edges.push(e);
            v = p;
        }
        Some(edges)
    }

    /// Vertices of one shortest path, source first.
    pub fn path_vertices(&self, target: usize) -> Option<Vec<usize>> {
        if !self.settled[target] {
            return None;
        }
        let mut verts = vec![target];
        let mut v = target;
        while let Some((p, _)) = self.parent(v) {
            verts.push(p);
            v = p;
        }
        verts.reverse();
        Some(verts)
    }
}

/// Dijkstra with a binary heap and lazy deletion. With `targets`, the search
/// stops as soon as every requested target is settled.
pub fn shortest_paths<T: Scalar, G: WeightedGraph<T> + ?Sized>(
    graph: &G,
    source: usize,
    targets: Option<&[usize]>,
) -> Result<ShortestPaths<T>> {
    let n = graph.n_vertices();
    if source >= n {
        return Err(Error::VertexOutOfRange { vertex: source, n_vertices: n });
    }
    let mut is_target = Vec::new();
    let mut remaining = 0usize;
    if let Some(ts) = targets {
        is_target = vec![false; n];
        for &t in ts {
            if t >= n {
                return Err(Error::VertexOutOfRange { vertex: t, n_vertices: n });
            }
            if !is_target[t] {
                is_target[t] = true;
                remaining += 1;
            }
        }
    }

    let mut dist = vec![T::infinity(); n];
    let mut parent_edge = vec![NO_PARENT; n];
    let mut parent_vertex = vec![NO_PARENT; n];
    let mut settled = vec![false; n];
    let mut order = Vec::new();
    let mut heap = BinaryHeap::new();
    dist[source] = T::zero();
    heap.push(State { dist: T::zero(), vertex: source as u32 });

    let early_exit = targets.is_some();
    if early_exit && remaining == 0 {
        return Ok(ShortestPaths { source, dist, parent_edge, parent_vertex, settled, order });
    }

    while let Some(State { dist: d, vertex }) = heap.pop() {
        let u = vertex as usize;
        if settled[u] || d > dist[u] {
            continue;
        }
        settled[u] = true;
        order.push(vertex);
        if early_exit && is_target[u] {
            remaining -= 1;
            if remaining == 0 {
                break;
            }
        }
        graph.for_each_neighbor(u, |v, w, e| {
            if settled[v] {
                return;
            }
            let nd = d + w;
            if nd < dist[v] {
                dist[v] = nd;
                parent_edge[v] = e as u32;
                parent_vertex[v] = vertex;
                heap.push(State { dist: nd, vertex: v as u32 });
            }
        });
    }

    Ok(ShortestPaths { source, dist, parent_edge, parent_vertex, settled, order })
}
