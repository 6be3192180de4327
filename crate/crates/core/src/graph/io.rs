use std::io::{BufRead, Read, Write};
use std::path::Path;

use super::pruned::PrunedGraph;
use super::stochastic::{StochasticEdge, StochasticGraph};
use crate::binio;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const GRAPH_MAGIC: &[u8] = b"GGLV1";
const WHAT: &str = "graph file";

impl StochasticGraph {
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        binio::write_magic(&mut w, GRAPH_MAGIC)?;
        binio::write_u64(&mut w, self.n_vertices() as u64)?;
        for &b in self.bias() {
            binio::write_f64(&mut w, b)?;
        }
        binio::write_u64(&mut w, self.n_edges() as u64)?;
        for e in self.edges() {
            binio::write_u32(&mut w, e.u() as u32)?;
            binio::write_u32(&mut w, e.v() as u32)?;
            binio::write_f64(&mut w, e.theta_w)?;
            binio::write_f64(&mut w, e.theta_p)?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        binio::read_magic(&mut r, GRAPH_MAGIC, WHAT)?;
        let n_vertices = binio::read_u64(&mut r, WHAT)? as usize;
        if n_vertices == 0 {
            return Err(Error::format(WHAT, "graph must contain the zero node"));
        }
        let n_words = n_vertices - 1;
        let bias = (0..n_words)
            .map(|_| binio::read_f64(&mut r, WHAT))
            .collect::<Result<Vec<_>>>()?;
        let n_edges = binio::read_u64(&mut r, WHAT)? as usize;
        let mut edges = Vec::with_capacity(n_edges.min(1 << 24));
        for _ in 0..n_edges {
            let u = binio::read_u32(&mut r, WHAT)? as usize;
            let v = binio::read_u32(&mut r, WHAT)? as usize;
            let theta_w = binio::read_f64(&mut r, WHAT)?;
            let theta_p = binio::read_f64(&mut r, WHAT)?;
            if u >= v {
                return Err(Error::format(WHAT, format!("edge ({u}, {v}) is not stored as u < v")));
            }
            edges.push(StochasticEdge::new(u, v, theta_w, theta_p));
        }
        binio::expect_eof(&mut r, WHAT)?;
        StochasticGraph::new(n_words, edges, bias).map_err(|e| Error::format(WHAT, e.to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = binio::create(path)?;
        self.write_binary(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_binary(binio::open(path)?)
    }
}

/// Writes `u<TAB>v<TAB>weight` lines.
pub fn write_edge_tsv<T: Scalar, W: Write>(graph: &PrunedGraph<T>, mut w: W) -> Result<()> {
    for &(u, v, weight) in graph.edges() {
        writeln!(w, "{u}\t{v}\t{weight}")?;
    }
    Ok(())
}

/// Reads an edge list written by [`write_edge_tsv`].
pub fn read_edge_tsv<T: Scalar, R: BufRead>(r: R, n_vertices: usize) -> Result<PrunedGraph<T>> {
    let mut edges = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = || Error::format("edge list", format!("line {}: expected u<TAB>v<TAB>weight", lineno + 1));
        let mut f = line.split('\t');
        let u: usize = f.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        let v: usize = f.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        let w: f64 = f.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        if f.next().is_some() {
            return Err(bad());
        }
        edges.push((u, v, T::of(w)));
    }
    PrunedGraph::new(n_vertices, edges).map_err(|e| Error::format("edge list", e.to_string()))
}
