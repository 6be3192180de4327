//! Vocabulary and co-occurrence statistics from pre-tokenized text.
//!
//! Input is one document per line with whitespace-separated tokens. Context
//! windows never cross line boundaries. A pair of in-vocabulary tokens at
//! distance `d <= window` contributes `1/d` to both `X[i][j]` and `X[j][i]`;
//! out-of-vocabulary tokens are dropped but still occupy a position.

use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::binio;
use crate::error::{Error, Result};

pub const DEFAULT_WINDOW: usize = 10;

/// Token ↔ id map ordered by decreasing frequency, ties by token.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    id_of: HashMap<String, u32>,
    freq: Vec<u64>,
    size_limit: usize,
}

impl Vocabulary {
    /// Builds a vocabulary from `(token, count)` pairs, sorting them into id order.
    pub fn from_counts(counts: impl IntoIterator<Item = (String, u64)>, size_limit: usize) -> Self {
        let mut entries: Vec<(String, u64)> = counts.into_iter().collect();
        entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        entries.truncate(size_limit);
        let mut tokens = Vec::with_capacity(entries.len());
        let mut freq = Vec::with_capacity(entries.len());
        let mut id_of = HashMap::with_capacity(entries.len());
        for (id, (tok, count)) in entries.into_iter().enumerate() {
            id_of.insert(tok.clone(), id as u32);
            tokens.push(tok);
            freq.push(count);
        }
        Vocabulary {
            tokens,
            id_of,
            freq,
            size_limit,
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn token(&self, id: usize) -> &str {
        &self.tokens[id]
    }

    pub fn id(&self, token: &str) -> Option<usize> {
        self.id_of.get(token).map(|&i| i as usize)
    }

    pub fn freq(&self) -> &[u64] {
        &self.freq
    }

    pub fn size_limit(&self) -> usize {
        self.size_limit
    }

    /// Writes `token<TAB>count` lines in id order.
    pub fn write_tsv<W: Write>(&self, mut w: W) -> Result<()> {
        for (tok, count) in self.tokens.iter().zip(&self.freq) {
            writeln!(w, "{tok}\t{count}")?;
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = binio::create(path)?;
        self.write_tsv(&mut w)?;
        w.flush()?;
        Ok(())
    }

    /// Reads a vocabulary TSV. Line order is taken as id order and must already
    /// follow the frequency ordering.
    pub fn read_tsv<R: BufRead>(r: R) -> Result<Self> {
        let mut tokens = Vec::new();
        let mut freq = Vec::new();
        let mut id_of = HashMap::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let (tok, count) = line.split_once('\t').ok_or_else(|| {
                Error::format("vocabulary", format!("line {}: expected token<TAB>count", lineno + 1))
            })?;
            let count: u64 = count.trim().parse().map_err(|_| {
                Error::format("vocabulary", format!("line {}: bad count {count:?}", lineno + 1))
            })?;
            if tok.is_empty() || tok.contains(char::is_whitespace) {
                return Err(Error::format(
                    "vocabulary",
                    format!("line {}: token must be non-empty without whitespace", lineno + 1),
                ));
            }
            if id_of.insert(tok.to_string(), tokens.len() as u32).is_some() {
                return Err(Error::format(
                    "vocabulary",
                    format!("line {}: duplicate token {tok:?}", lineno + 1),
                ));
            }
            if let (Some(&prev_count), Some(prev_tok)) = (freq.last(), tokens.last()) {
                let ordered = prev_count > count || (prev_count == count && prev_tok < &tok.to_string());
                if !ordered {
                    return Err(Error::format(
                        "vocabulary",
                        format!("line {}: entries are not in frequency order", lineno + 1),
                    ));
                }
            }
            tokens.push(tok.to_string());
            freq.push(count);
        }
        if tokens.is_empty() {
            return Err(Error::Empty("vocabulary file has no entries".into()));
        }
        let size_limit = tokens.len();
        Ok(Vocabulary {
            tokens,
            id_of,
            freq,
            size_limit,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_tsv(binio::open(path)?)
    }
}

fn count_tokens<S: AsRef<str>>(lines: impl IntoIterator<Item = S>) -> HashMap<String, u64> {
    let mut counts: HashMap<String, u64> = HashMap::new();
    for line in lines {
        for tok in line.as_ref().split_whitespace() {
            match counts.get_mut(tok) {
                Some(c) => *c += 1,
                None => {
                    counts.insert(tok.to_string(), 1);
                }
            }
        }
    }
    counts
}

fn finish_vocabulary(counts: HashMap<String, u64>, max_size: usize, min_count: u64) -> Result<Vocabulary> {
    if counts.is_empty() {
        return Err(Error::Empty("corpus contains no tokens".into()));
    }
    let kept = counts.into_iter().filter(|(_, c)| *c >= min_count);
    let vocab = Vocabulary::from_counts(kept, max_size);
    if vocab.is_empty() {
        return Err(Error::Empty(format!("no token reaches min_count={min_count}")));
    }
    Ok(vocab)
}

/// Counts tokens and keeps the `max_size` most frequent with count ≥ `min_count`.
pub fn build_vocabulary<S: AsRef<str>>(
    lines: impl IntoIterator<Item = S>,
    max_size: usize,
    min_count: u64,
) -> Result<Vocabulary> {
    if max_size == 0 {
        return Err(Error::invalid("max_size", "must be positive"));
    }
    finish_vocabulary(count_tokens(lines), max_size, min_count)
}

/// Same result as [`build_vocabulary`], counting `shards` slices of the corpus in parallel.
pub fn build_vocabulary_sharded<S: AsRef<str> + Sync>(
    lines: &[S],
    max_size: usize,
    min_count: u64,
    shards: usize,
) -> Result<Vocabulary> {
    if max_size == 0 {
        return Err(Error::invalid("max_size", "must be positive"));
    }
    let counts = shard_ranges(lines.len(), shards)
        .into_par_iter()
        .map(|(lo, hi)| count_tokens(&lines[lo..hi]))
        .reduce(HashMap::new, |mut a, b| {
            for (tok, c) in b {
                *a.entry(tok).or_insert(0) += c;
            }
            a
        });
    finish_vocabulary(counts, max_size, min_count)
}

fn shard_ranges(len: usize, shards: usize) -> Vec<(usize, usize)> {
    let shards = shards.max(1);
    let chunk = len.div_ceil(shards).max(1);
    (0..len).step_by(chunk).map(|lo| (lo, (lo + chunk).min(len))).collect()
}

/// Symmetric sparse co-occurrence matrix, one sorted row per word.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseCooccurrence {
    rows: Vec<Vec<(u32, f64)>>,
    nnz_total: usize,
    window: Option<usize>,
}

impl SparseCooccurrence {
    /// Assembles a matrix from rows; entries are sorted, and non-positive or
    /// duplicate columns are rejected.
    pub fn from_rows(mut rows: Vec<Vec<(u32, f64)>>, window: Option<usize>) -> Result<Self> {
        let n = rows.len();
        for (i, row) in rows.iter_mut().enumerate() {
            row.sort_by_key(|&(j, _)| j);
            for w in row.windows(2) {
                if w[0].0 == w[1].0 {
                    return Err(Error::format("co-occurrence", format!("duplicate entry ({i}, {})", w[0].0)));
                }
            }
            for &(j, x) in row.iter() {
                if j as usize >= n {
                    return Err(Error::format("co-occurrence", format!("column {j} out of range in row {i}")));
                }
                if !(x > 0.0 && x.is_finite()) {
                    return Err(Error::format("co-occurrence", format!("entry ({i}, {j}) = {x} is not positive")));
                }
            }
        }
        let nnz_total = rows.iter().map(Vec::len).sum();
        Ok(SparseCooccurrence {
            rows,
            nnz_total,
            window,
        })
    }

    /// Builds a matrix from symmetric triplets `(i, j, x)` given once per unordered pair.
    pub fn from_pairs(n_words: usize, pairs: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        let mut rows: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n_words];
        for (i, j, x) in pairs {
            if i >= n_words || j >= n_words {
                return Err(Error::invalid("pairs", format!("({i}, {j}) outside vocabulary of {n_words}")));
            }
            rows[i].push((j as u32, x));
            if i != j {
                rows[j].push((i as u32, x));
            }
        }
        Self::from_rows(rows, None)
    }

    pub fn n_words(&self) -> usize {
        self.rows.len()
    }

    pub fn nnz_total(&self) -> usize {
        self.nnz_total
    }

    pub fn window(&self) -> Option<usize> {
        self.window
    }

    pub fn row(&self, i: usize) -> &[(u32, f64)] {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[Vec<(u32, f64)>] {
        &self.rows
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let row = &self.rows[i];
        match row.binary_search_by_key(&(j as u32), |&(c, _)| c) {
            Ok(k) => row[k].1,
            Err(_) => 0.0,
        }
    }

    /// All stored entries in `(i, j)` order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().map(move |&(j, x)| (i, j as usize, x)))
    }

    pub fn total_mass(&self) -> f64 {
        self.iter().map(|(_, _, x)| x).sum()
    }

    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        binio::write_magic(&mut w, COOC_MAGIC)?;
        binio::write_u64(&mut w, self.rows.len() as u64)?;
        binio::write_u64(&mut w, self.nnz_total as u64)?;
        for (i, j, x) in self.iter() {
            binio::write_u32(&mut w, i as u32)?;
            binio::write_u32(&mut w, j as u32)?;
            binio::write_f64(&mut w, x)?;
        }
        Ok(())
    }

    pub fn read_binary<R: std::io::Read>(mut r: R) -> Result<Self> {
        const WHAT: &str = "co-occurrence file";
        binio::read_magic(&mut r, COOC_MAGIC, WHAT)?;
        let n = binio::read_u64(&mut r, WHAT)? as usize;
        let nnz = binio::read_u64(&mut r, WHAT)? as usize;
        let mut rows: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
        let mut prev: Option<(u32, u32)> = None;
        for _ in 0..nnz {
            let i = binio::read_u32(&mut r, WHAT)?;
            let j = binio::read_u32(&mut r, WHAT)?;
            let x = binio::read_f64(&mut r, WHAT)?;
            if (i as usize) >= n || (j as usize) >= n {
                return Err(Error::format(WHAT, format!("record ({i}, {j}) outside |V|={n}")));
            }
            if prev.is_some_and(|p| p >= (i, j)) {
                return Err(Error::format(WHAT, "records not sorted strictly by (i, j)"));
            }
            prev = Some((i, j));
            rows[i as usize].push((j, x));
        }
        binio::expect_eof(&mut r, WHAT)?;
        let cooc = Self::from_rows(rows, None)?;
        if !cooc.is_symmetric(1e-9) {
            return Err(Error::format(WHAT, "matrix is not symmetric"));
        }
        Ok(cooc)
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

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.iter().all(|(i, j, x)| (self.get(j, i) - x).abs() <= tol)
    }
}

const COOC_MAGIC: &[u8] = b"COOC1";

/// Accumulated context mass. Windows whose harmonic weights share a small common
/// denominator are summed exactly as integers so any shard split gives identical bits.
trait Mass: Copy + Default + Send + Sync + std::ops::AddAssign {
    fn weight(d: usize, scale: u64) -> Self;
    fn to_f64(self, scale: u64) -> f64;
}

impl Mass for u64 {
    fn weight(d: usize, scale: u64) -> Self {
        scale / d as u64
    }
    fn to_f64(self, scale: u64) -> f64 {
        self as f64 / scale as f64
    }
}

impl Mass for f64 {
    fn weight(d: usize, _: u64) -> Self {
        1.0 / d as f64
    }
    fn to_f64(self, _: u64) -> f64 {
        self
    }
}

fn lcm_up_to(window: usize) -> Option<u64> {
    fn gcd(a: u64, b: u64) -> u64 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    let mut l: u64 = 1;
    for d in 1..=window as u64 {
        l = l.checked_mul(d / gcd(l, d))?;
        if l > u32::MAX as u64 {
            return None;
        }
    }
    Some(l)
}

type RowMaps<M> = Vec<HashMap<u32, M>>;

fn accumulate<M: Mass, S: AsRef<str>>(
    lines: impl IntoIterator<Item = S>,
    vocab: &Vocabulary,
    window: usize,
    scale: u64,
) -> RowMaps<M> {
    let mut rows: RowMaps<M> = vec![HashMap::new(); vocab.len()];
    let mut ids: Vec<Option<u32>> = Vec::new();
    for line in lines {
        ids.clear();
        ids.extend(line.as_ref().split_whitespace().map(|t| vocab.id(t).map(|i| i as u32)));
        for p in 0..ids.len() {
            let Some(a) = ids[p] else { continue };
            for d in 1..=window {
                let q = p + d;
                if q >= ids.len() {
                    break;
                }
                let Some(b) = ids[q] else { continue };
                let w = M::weight(d, scale);
                *rows[a as usize].entry(b).or_default() += w;
                *rows[b as usize].entry(a).or_default() += w;
            }
        }
    }
    rows
}

fn merge<M: Mass>(mut a: RowMaps<M>, b: RowMaps<M>) -> RowMaps<M> {
    if a.is_empty() {
        return b;
    }
    for (ra, rb) in a.iter_mut().zip(b) {
        for (j, m) in rb {
            *ra.entry(j).or_default() += m;
        }
    }
    a
}

fn finish<M: Mass>(maps: RowMaps<M>, n: usize, window: usize, scale: u64) -> Result<SparseCooccurrence> {
    let mut rows: Vec<Vec<(u32, f64)>> = maps
        .into_iter()
        .map(|m| m.into_iter().map(|(j, x)| (j, x.to_f64(scale))).collect())
        .collect();
    rows.resize(n, Vec::new());
    SparseCooccurrence::from_rows(rows, Some(window))
}

/// Accumulates `1/d`-weighted co-occurrences within `window` tokens on each line.
pub fn build_cooccurrence<S: AsRef<str>>(
    lines: impl IntoIterator<Item = S>,
    vocab: &Vocabulary,
    window: usize,
) -> Result<SparseCooccurrence> {
    if window == 0 {
        return Err(Error::invalid("window", "must be at least 1"));
    }
    match lcm_up_to(window) {
        Some(scale) => finish(accumulate::<u64, _>(lines, vocab, window, scale), vocab.len(), window, scale),
        None => finish(accumulate::<f64, _>(lines, vocab, window, 1), vocab.len(), window, 1),
    }
}

/// Parallel [`build_cooccurrence`] over `shards` contiguous slices of lines.
pub fn build_cooccurrence_sharded<S: AsRef<str> + Sync>(
    lines: &[S],
    vocab: &Vocabulary,
    window: usize,
    shards: usize,
) -> Result<SparseCooccurrence> {
    if window == 0 {
        return Err(Error::invalid("window", "must be at least 1"));
    }
    fn run<M: Mass, S: AsRef<str> + Sync>(
        lines: &[S],
        vocab: &Vocabulary,
        window: usize,
        shards: usize,
        scale: u64,
    ) -> Result<SparseCooccurrence> {
        // Collect then fold in shard order so the f64 fallback is also deterministic.
        let parts: Vec<RowMaps<M>> = shard_ranges(lines.len(), shards)
            .into_par_iter()
            .map(|(lo, hi)| accumulate::<M, _>(&lines[lo..hi], vocab, window, scale))
            .collect();
        let merged = parts.into_iter().fold(Vec::new(), merge);
        finish(merged, vocab.len(), window, scale)
    }
    match lcm_up_to(window) {
        Some(scale) => run::<u64, _>(lines, vocab, window, shards, scale),
        None => run::<f64, _>(lines, vocab, window, shards, 1),
    }
}

/// Reads a corpus file into memory, one entry per line.
pub fn read_corpus(path: &Path) -> Result<Vec<String>> {
    let r = binio::open(path)?;
    let mut lines = Vec::new();
    for line in r.lines() {
        lines.push(line.map_err(|e| match e.kind() {
            std::io::ErrorKind::InvalidData => Error::format("corpus", "input is not valid UTF-8"),
            _ => Error::Io(e),
        })?);
    }
    Ok(lines)
}
