//! Self-avoiding paths, passage times, and the lower-bound pipeline.
//!
//! `surgery` is the constructive step behind the time-constant theorem: any
//! long path is converted into a `1 -> n` self-avoiding path that shares all
//! but at most four of its edges. `threshold_lower_bound` chains it with the
//! DFS excursion of a threshold subgraph, giving a certified lower bound on
//! `W_n` for any threshold.

use std::fmt;
use std::str::FromStr;

use crate::dfs::{longest_u_excursion, run_dfs};
use crate::error::{Error, Result};
use crate::graph::{threshold_subgraph, EdgeWeights};

/// A self-avoiding path: a nonempty sequence of distinct vertex ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path {
    vertices: Vec<usize>,
}

impl Path {
    /// Validates distinctness and nonemptiness; ids must be >= 1.
    pub fn new(vertices: Vec<usize>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::InvalidParameter("path must be nonempty".to_string()));
        }
        if vertices.contains(&0) {
            return Err(Error::InvalidParameter("vertex ids are 1-based".to_string()));
        }
        let mut seen = vec![];
        for &v in &vertices {
            if seen.contains(&v) {
                return Err(Error::InvalidParameter(format!("vertex {v} repeats: not self-avoiding")));
            }
            seen.push(v);
        }
        Ok(Path { vertices })
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    /// Edge count: vertex count minus one.
    pub fn len(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        false // a path always has at least one vertex
    }

    pub fn first(&self) -> usize {
        self.vertices[0]
    }

    pub fn last(&self) -> usize {
        *self.vertices.last().unwrap()
    }

    /// Consecutive unordered edge pairs, normalized `(min, max)`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.vertices.windows(2).map(|w| (w[0].min(w[1]), w[0].max(w[1])))
    }
}

impl fmt::Display for Path {
    /// Serializes as a comma-joined vertex list, e.g. `1,4,2,7`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for v in &self.vertices {
            if !first {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
            first = false;
        }
        Ok(())
    }
}

impl FromStr for Path {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let vertices = s
            .split(',')
            .map(|part| {
                part.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Parse(format!("bad vertex id {part:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Path::new(vertices)
    }
}

/// Sum of edge weights along the path, in path order; a single vertex has
/// passage time 0.
pub fn passage_time(path: &Path, weights: &EdgeWeights) -> Result<f64> {
    let n = weights.n();
    if let Some(&bad) = path.vertices().iter().find(|&&v| v > n) {
        return Err(Error::Precondition(format!("vertex {bad} outside 1..={n}")));
    }
    Ok(path
        .vertices()
        .windows(2)
        .map(|w| weights.weight(w[0], w[1]))
        .sum())
}

/// Rebuilds `path` into a self-avoiding `1 -> n` path.
///
/// Vertices 1 and `n` are deleted from the path, splitting it into pieces
/// kept in original order and orientation; the result is
/// `1, piece_1, ..., piece_k, n` joined by fresh connector edges (at most
/// four edges of the input are lost, so the output shares at least
/// `len(path) - 4` edges with it). With no pieces left the result is the
/// direct edge `(1, n)`.
pub fn surgery(path: &Path, weights: &EdgeWeights) -> Result<Path> {
    let n = weights.n();
    if n < 2 {
        return Err(Error::Precondition("surgery requires n >= 2".to_string()));
    }
    if let Some(&bad) = path.vertices().iter().find(|&&v| v > n) {
        return Err(Error::Precondition(format!("vertex {bad} outside 1..={n}")));
    }

    let mut result = vec![1usize];
    let mut piece: Vec<usize> = Vec::new();
    for &v in path.vertices() {
        if v == 1 || v == n {
            if !piece.is_empty() {
                result.append(&mut piece);
            }
        } else {
            piece.push(v);
        }
    }
    if !piece.is_empty() {
        result.append(&mut piece);
    }
    result.push(n);
    Path::new(result)
}

/// Threshold pipeline: keep the edges with weight above `tau`, run DFS,
/// take the longest stack excursion, repair it into a `1 -> n` path with
/// [`surgery`], and price it under the full weights. The value is always a
/// valid lower bound for `W_n`.
pub fn threshold_lower_bound(weights: &EdgeWeights, tau: f64) -> Result<(Path, f64)> {
    let graph = threshold_subgraph(weights, tau);
    let trace = run_dfs(&graph);
    let excursion = longest_u_excursion(&trace);
    let excursion_len = excursion.len();
    let path = surgery(&excursion, weights)?;
    let value = passage_time(&path, weights)?;
    // every excursion edge beats tau and at most 4 are lost in surgery
    let floor = excursion_len.saturating_sub(4) as f64 * tau;
    debug_assert!(
        value >= floor - 1e-9 * floor.abs().max(1.0),
        "pipeline value {value} below its certified floor {floor} at tau {tau}"
    );
    Ok((path, value))
}

/// Default threshold grid: the empirical weight quantiles
/// `{0.05, 0.10, ..., 0.95}`.
pub fn default_tau_grid(weights: &EdgeWeights) -> Vec<f64> {
    let ps: Vec<f64> = (1..=19).map(|k| k as f64 * 0.05).collect();
    weights.quantiles(&ps)
}

/// Best [`threshold_lower_bound`] over a threshold grid; ties keep the
/// earliest grid entry.
pub fn best_threshold_lower_bound(
    weights: &EdgeWeights,
    tau_grid: &[f64],
) -> Result<(Path, f64)> {
    if tau_grid.is_empty() {
        return Err(Error::Precondition("threshold grid must be nonempty".to_string()));
    }
    let mut best: Option<(Path, f64)> = None;
    for &tau in tau_grid {
        let (path, value) = threshold_lower_bound(weights, tau)?;
        let better = match &best {
            Some((_, best_value)) => value > *best_value,
            None => true,
        };
        if better {
            best = Some((path, value));
        }
    }
    Ok(best.unwrap())
}
