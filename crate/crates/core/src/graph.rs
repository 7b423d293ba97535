//! Complete-graph edge weights and simple graphs on `[n] = {1, ..., n}`.
//!
//! [`EdgeWeights`] stores the full symmetric weight assignment on `K_n` in a
//! flat triangular array; it is the single source of randomness for one
//! instance. [`SimpleGraph`] is an undirected graph on `[n]` backed by a
//! triangular bitset, produced either by thresholding weights or by Bernoulli
//! sampling.

use std::io::{BufRead, BufReader, Read, Write};

use rand::RngCore;

use crate::error::{Error, Result};
use crate::rng::unit_open;
use crate::weights::WeightDistribution;

/// Flat index of edge `<i, j>` (1-based, `i < j`) in row-major order over
/// ordered pairs: `(i-1) n - i(i+1)/2 + j - 1`.
#[inline]
pub fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(1 <= i && i < j && j <= n);
    (i - 1) * n + (j - 1) - i * (i + 1) / 2
}

/// Number of vertex pairs, `C(n, 2)`.
#[inline]
pub fn pair_count(n: usize) -> usize {
    n * (n - 1) / 2
}

/// Iterates all pairs `<i, j>`, `i < j`, in ascending flat-index order.
pub fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (1..=n).flat_map(move |i| (i + 1..=n).map(move |j| (i, j)))
}

// ---------------------------------------------------------------------------
// EdgeWeights
// ---------------------------------------------------------------------------

/// The full weight assignment on `K_n`: one strictly positive entry per
/// unordered pair, in ascending flat-index order.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeWeights {
    n: usize,
    w: Vec<f64>,
}

impl EdgeWeights {
    /// Wraps an existing flat array; must have length `n(n-1)/2` with all
    /// entries strictly positive and finite.
    pub fn from_flat(n: usize, w: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::Precondition(format!("edge weights require n >= 2, got {n}")));
        }
        if w.len() != pair_count(n) {
            return Err(Error::InvalidParameter(format!(
                "flat array length {} != n(n-1)/2 = {}",
                w.len(),
                pair_count(n)
            )));
        }
        if let Some(bad) = w.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "edge weights must be strictly positive and finite, got {bad}"
            )));
        }
        Ok(EdgeWeights { n, w })
    }

    /// Vertex count.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Weight of edge `<i, j>`; endpoint order does not matter.
    #[inline]
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        self.w[pair_index(self.n, i, j)]
    }

    /// The flat triangular array, ascending flat-index order.
    pub fn flat(&self) -> &[f64] {
        &self.w
    }

    /// Largest entry.
    pub fn max_weight(&self) -> f64 {
        self.w.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Empirical quantile by the nearest-rank rule on the sorted entries:
    /// `q(p) = sorted[round(p (m-1))]`.
    pub fn quantile(&self, p: f64) -> f64 {
        debug_assert!((0.0..=1.0).contains(&p));
        let mut sorted = self.w.clone();
        sorted.sort_by(f64::total_cmp);
        let idx = (p * (sorted.len() - 1) as f64).round() as usize;
        sorted[idx]
    }

    /// Empirical quantiles for several levels, sorting once.
    pub fn quantiles(&self, ps: &[f64]) -> Vec<f64> {
        let mut sorted = self.w.clone();
        sorted.sort_by(f64::total_cmp);
        ps.iter()
            .map(|p| sorted[(p * (sorted.len() - 1) as f64).round() as usize])
            .collect()
    }

    /// Writes the instance dump: `# key: value` provenance comments are the
    /// caller's business; this emits the `i,j,weight` header and one row per
    /// edge in ascending `(i, j)` order, weights with 17 significant digits.
    pub fn write_csv(&self, out: &mut impl Write) -> Result<()> {
        writeln!(out, "i,j,weight")?;
        for (i, j) in pairs(self.n) {
            writeln!(out, "{i},{j},{:.16e}", self.w[pair_index(self.n, i, j)])?;
        }
        Ok(())
    }

    /// Reads an instance dump produced by [`Self::write_csv`]; `#` comment
    /// lines and blank lines are skipped. Rows must cover every pair exactly
    /// once; round-tripping reproduces the flat array bit-for-bit.
    pub fn read_csv(input: &mut impl Read) -> Result<Self> {
        let reader = BufReader::new(input);
        let mut rows: Vec<(usize, usize, f64)> = Vec::new();
        let mut max_vertex = 0usize;
        for line in reader.lines() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line == "i,j,weight" {
                continue;
            }
            let mut parts = line.split(',');
            let (i, j, w) = (|| -> Option<(usize, usize, f64)> {
                let i = parts.next()?.trim().parse().ok()?;
                let j = parts.next()?.trim().parse().ok()?;
                let w = parts.next()?.trim().parse().ok()?;
                if parts.next().is_some() {
                    return None;
                }
                Some((i, j, w))
            })()
            .ok_or_else(|| Error::Parse(format!("bad weights row: {line:?}")))?;
            if i == 0 || j <= i {
                return Err(Error::Parse(format!("weights row must have 1 <= i < j: {line:?}")));
            }
            max_vertex = max_vertex.max(j);
            rows.push((i, j, w));
        }
        let n = max_vertex;
        if n < 2 || rows.len() != pair_count(n) {
            return Err(Error::Parse(format!(
                "weights dump has {} rows, expected C({n},2) = {}",
                rows.len(),
                if n >= 2 { pair_count(n) } else { 0 }
            )));
        }
        let mut w = vec![f64::NAN; pair_count(n)];
        for (i, j, v) in rows {
            let idx = pair_index(n, i, j);
            if !w[idx].is_nan() {
                return Err(Error::Parse(format!("duplicate edge <{i},{j}> in weights dump")));
            }
            w[idx] = v;
        }
        EdgeWeights::from_flat(n, w)
    }
}

/// Samples the full assignment: each entry drawn independently by
/// `dist.sample`, in ascending flat-index order. The order is part of the
/// contract — a fixed `(seed, stream)` reproduces the array exactly.
pub fn sample_weights(
    n: usize,
    dist: &WeightDistribution,
    rng: &mut impl RngCore,
) -> Result<EdgeWeights> {
    if n < 2 {
        return Err(Error::Precondition(format!("sample_weights requires n >= 2, got {n}")));
    }
    let w = (0..pair_count(n)).map(|_| dist.sample(rng)).collect();
    Ok(EdgeWeights { n, w })
}

// ---------------------------------------------------------------------------
// SimpleGraph
// ---------------------------------------------------------------------------

/// An undirected simple graph on vertex set `[n]`, no self-loops.
///
/// Edges live in a triangular bitset addressed by [`pair_index`]; membership
/// queries are O(1) and the structure is immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct SimpleGraph {
    n: usize,
    bits: Vec<u64>,
    edge_count: usize,
}

impl SimpleGraph {
    fn empty(n: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::Precondition("graph requires n >= 1".to_string()));
        }
        let words = pair_count(n).div_ceil(64);
        Ok(SimpleGraph { n, bits: vec![0; words], edge_count: 0 })
    }

    /// Builds a graph from an edge list; endpoints may come in either order,
    /// duplicates collapse. Self-loops and endpoints outside `1..=n` are
    /// errors.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut g = SimpleGraph::empty(n)?;
        for (i, j) in edges {
            if i == j {
                return Err(Error::InvalidParameter(format!("self-loop at vertex {i}")));
            }
            if i < 1 || j < 1 || i > n || j > n {
                return Err(Error::InvalidParameter(format!(
                    "edge <{i},{j}> outside vertex set 1..={n}"
                )));
            }
            g.insert(i.min(j), i.max(j));
        }
        Ok(g)
    }

    fn insert(&mut self, i: usize, j: usize) {
        let idx = pair_index(self.n, i, j);
        let (word, bit) = (idx / 64, idx % 64);
        if self.bits[word] & (1 << bit) == 0 {
            self.bits[word] |= 1 << bit;
            self.edge_count += 1;
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Whether `<i, j>` is an edge; endpoint order does not matter.
    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        if i == j {
            return false;
        }
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        let idx = pair_index(self.n, i, j);
        self.bits[idx / 64] & (1 << (idx % 64)) != 0
    }

    /// All edges in ascending `(i, j)` order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        pairs(self.n).filter(move |&(i, j)| self.has_edge(i, j))
    }

    /// Neighbor bitmask of `v` for graphs with `n <= 64`, used by the
    /// exhaustive subset checks.
    pub(crate) fn neighbor_mask(&self, v: usize) -> u64 {
        debug_assert!(self.n <= 64);
        let mut mask = 0u64;
        for u in 1..=self.n {
            if u != v && self.has_edge(v, u) {
                mask |= 1 << (u - 1);
            }
        }
        mask
    }

    /// Writes the edge-list format: a `# n=<n>` directive (so isolated
    /// vertices survive the round trip) then one `i j` pair per line,
    /// 1-based, `i < j`, ascending.
    pub fn write_edgelist(&self, out: &mut impl Write) -> Result<()> {
        writeln!(out, "# n={}", self.n)?;
        for (i, j) in self.edges() {
            writeln!(out, "{i} {j}")?;
        }
        Ok(())
    }

    /// Reads the edge-list format: one `i j` pair per line, `#` starts a
    /// comment. A `# n=<n>` directive fixes the vertex count; otherwise the
    /// largest endpoint does.
    pub fn read_edgelist(input: &mut impl Read) -> Result<Self> {
        let reader = BufReader::new(input);
        let mut edges: Vec<(usize, usize)> = Vec::new();
        let mut declared_n: Option<usize> = None;
        let mut max_vertex = 0usize;
        for line in reader.lines() {
            let line = line?;
            let line = line.trim();
            if let Some(rest) = line.strip_prefix('#') {
                if let Some(v) = rest.trim().strip_prefix("n=") {
                    let n = v
                        .trim()
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad n directive: {line:?}")))?;
                    declared_n = Some(n);
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let (i, j) = (|| -> Option<(usize, usize)> {
                let i = parts.next()?.parse().ok()?;
                let j = parts.next()?.parse().ok()?;
                if parts.next().is_some() {
                    return None;
                }
                Some((i, j))
            })()
            .ok_or_else(|| Error::Parse(format!("bad edge line: {line:?}")))?;
            if i == 0 || j <= i {
                return Err(Error::Parse(format!("edge line must have 1 <= i < j: {line:?}")));
            }
            max_vertex = max_vertex.max(j);
            edges.push((i, j));
        }
        let n = match declared_n {
            Some(n) if n >= max_vertex => n,
            Some(n) => {
                return Err(Error::Parse(format!(
                    "declared n={n} smaller than largest endpoint {max_vertex}"
                )))
            }
            None if max_vertex >= 1 => max_vertex,
            None => return Err(Error::Parse("empty edge list and no n directive".to_string())),
        };
        SimpleGraph::from_edges(n, edges)
    }
}

/// The subgraph of `K_n` keeping exactly the edges with weight strictly
/// above `tau`. With `tau = H^{-1}(p)` this has the law of `G(n, p)`.
pub fn threshold_subgraph(weights: &EdgeWeights, tau: f64) -> SimpleGraph {
    let n = weights.n;
    let mut g = SimpleGraph::empty(n).expect("n >= 2");
    for (idx, &w) in weights.w.iter().enumerate() {
        if w > tau {
            let (word, bit) = (idx / 64, idx % 64);
            g.bits[word] |= 1 << bit;
            g.edge_count += 1;
        }
    }
    g
}

/// Samples `G(n, p)`: each of the `n(n-1)/2` possible edges included
/// independently with probability `p`, drawn in ascending flat-index order
/// (one uniform per pair).
pub fn sample_gnp(n: usize, p: f64, rng: &mut impl RngCore) -> Result<SimpleGraph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Precondition(format!("edge probability {p} outside [0, 1]")));
    }
    let mut g = SimpleGraph::empty(n)?;
    for idx in 0..pair_count(n) {
        if unit_open(rng) < p {
            let (word, bit) = (idx / 64, idx % 64);
            g.bits[word] |= 1 << bit;
            g.edge_count += 1;
        }
    }
    Ok(g)
}
