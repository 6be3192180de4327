use std::collections::{HashMap, VecDeque};
use std::io::BufRead;
use std::path::Path;

use crate::binio;
use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::eval::spearman;
use crate::graph::PrunedGraph;
use crate::scalar::Scalar;

/// Child→parent noun edges with a designated root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Taxonomy {
    pub root: String,
    pub edges: Vec<(String, String)>,
}

impl Taxonomy {
    /// Validates that the root has no parent and that no cycle is reachable
    /// from it.
    pub fn new(root: String, edges: Vec<(String, String)>) -> Result<Self> {
        let t = Taxonomy { root, edges };
        if t.edges.iter().any(|(child, _)| *child == t.root) {
            return Err(Error::format("taxonomy", format!("root {:?} has a parent", t.root)));
        }
        t.check_acyclic()?;
        Ok(t)
    }

    fn children(&self) -> HashMap<&str, Vec<&str>> {
        let mut children: HashMap<&str, Vec<&str>> = HashMap::new();
        for (c, p) in &self.edges {
            children.entry(p.as_str()).or_default().push(c.as_str());
        }
        children
    }

    fn check_acyclic(&self) -> Result<()> {
        // Iterative DFS with colours over nodes reachable from the root.
        let children = self.children();
        let mut state: HashMap<&str, u8> = HashMap::new();
        let mut stack: Vec<(&str, usize)> = vec![(self.root.as_str(), 0)];
        state.insert(self.root.as_str(), 1);
        while let Some(&mut (node, ref mut next)) = stack.last_mut() {
            let kids = children.get(node).map_or(&[][..], |v| v.as_slice());
            if *next < kids.len() {
                let kid = kids[*next];
                *next += 1;
                match state.get(kid) {
                    Some(1) => return Err(Error::format("taxonomy", format!("cycle through {kid:?}"))),
                    Some(_) => {}
                    None => {
                        state.insert(kid, 1);
                        stack.push((kid, 0));
                    }
                }
            } else {
                state.insert(node, 2);
                stack.pop();
            }
        }
        Ok(())
    }

    /// `#root<TAB>token` header, then `child<TAB>parent` lines.
    pub fn read_tsv<R: BufRead>(r: R) -> Result<Self> {
        let what = "taxonomy";
        let mut root = None;
        let mut edges = Vec::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            let (a, b) = line
                .split_once('\t')
                .ok_or_else(|| Error::format(what, format!("line {}: expected two tab-separated fields", lineno + 1)))?;
            let (a, b) = (a.trim(), b.trim());
            if a == "#root" {
                if root.replace(b.to_string()).is_some() {
                    return Err(Error::format(what, format!("line {}: second #root header", lineno + 1)));
                }
                continue;
            }
            if a.is_empty() || b.is_empty() {
                return Err(Error::format(what, format!("line {}: empty token", lineno + 1)));
            }
            edges.push((a.to_string(), b.to_string()));
        }
        let root = root.ok_or_else(|| Error::format(what, "missing #root header"))?;
        Taxonomy::new(root, edges)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_tsv(binio::open(path)?)
    }

    /// Hop depth from the root of every node reachable from it (shortest
    /// depth when a node has several parents).
    pub fn levels(&self) -> HashMap<&str, usize> {
        let children = self.children();
        let mut level = HashMap::from([(self.root.as_str(), 0usize)]);
        let mut queue = VecDeque::from([self.root.as_str()]);
        while let Some(node) = queue.pop_front() {
            let next = level[node] + 1;
            for &kid in children.get(node).map_or(&[][..], |v| v.as_slice()) {
                if !level.contains_key(kid) {
                    level.insert(kid, next);
                    queue.push_back(kid);
                }
            }
        }
        level
    }
}

/// Levels of the nouns present in both the vocabulary and the taxonomy,
/// ordered by vocabulary id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HierarchyLevels {
    pub words: Vec<usize>,
    /// Hop distance from the root in the graph; unreachable nouns get the
    /// largest reachable level plus one.
    pub ours: Vec<usize>,
    pub theirs: Vec<usize>,
}

pub fn extract_hierarchy<T: Scalar>(
    graph: &PrunedGraph<T>,
    vocab: &Vocabulary,
    taxonomy: &Taxonomy,
) -> Result<HierarchyLevels> {
    if vocab.len() > graph.n_vertices() {
        return Err(Error::invalid("vocab", "more words than graph vertices"));
    }
    let lookup = |w: &str| vocab.id(w).or_else(|| vocab.id(&w.to_lowercase()));
    let root = lookup(&taxonomy.root)
        .ok_or_else(|| Error::invalid("taxonomy", format!("root {:?} is not in the vocabulary", taxonomy.root)))?;
    let bfs = graph.bfs_levels(root);
    let last = bfs.iter().flatten().copied().max().unwrap_or(0) + 1;
    let mut found: Vec<(usize, usize)> = taxonomy
        .levels()
        .into_iter()
        .filter_map(|(w, level)| lookup(w).map(|id| (id, level)))
        .collect();
    found.sort_unstable();
    found.dedup_by_key(|e| e.0);
    Ok(HierarchyLevels {
        words: found.iter().map(|e| e.0).collect(),
        ours: found.iter().map(|e| bfs[e.0].unwrap_or(last)).collect(),
        theirs: found.iter().map(|e| e.1).collect(),
    })
}

/// `(word_correlation, level_correlation)`: Spearman over shared nouns of
/// (our level, taxonomy level), and over distinct taxonomy levels `k` of
/// (`k`, mean of our levels of nouns at taxonomy level `k`).
pub fn hierarchy_correlations(levels: &HierarchyLevels) -> Result<(f64, f64)> {
    let ours: Vec<f64> = levels.ours.iter().map(|&l| l as f64).collect();
    let theirs: Vec<f64> = levels.theirs.iter().map(|&l| l as f64).collect();
    let word = spearman(&ours, &theirs)?;
    let mut by_level: std::collections::BTreeMap<usize, (f64, usize)> = Default::default();
    for (&o, &t) in levels.ours.iter().zip(&levels.theirs) {
        let e = by_level.entry(t).or_default();
        e.0 += o as f64;
        e.1 += 1;
    }
    if by_level.len() < 2 {
        return Err(Error::invalid("taxonomy", "need at least 2 distinct taxonomy levels"));
    }
    let ks: Vec<f64> = by_level.keys().map(|&k| k as f64).collect();
    let means: Vec<f64> = by_level.values().map(|&(s, c)| s / c as f64).collect();
    Ok((word, spearman(&ks, &means)?))
}
