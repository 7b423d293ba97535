//! Exact computation of `W_n`, the largest passage time over self-avoiding
//! `1 -> n` paths.
//!
//! Two independent routes: exhaustive path enumeration (the oracle of
//! record, tiny `n`) and a dynamic program over (interior vertex subset,
//! last vertex) states (small `n`). Both accumulate sums left to right along
//! the path, so on a common instance they agree bit for bit whenever the
//! optimal path is unique.

use crate::error::{Error, Result};
use crate::graph::EdgeWeights;
use crate::paths::Path;

/// An exact optimum with a path achieving it.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactResult {
    pub value: f64,
    pub witness: Path,
}

/// Exhaustive enumeration of every self-avoiding `1 -> n` path, in
/// lexicographic vertex-sequence order; among ties the first (lexicographic
/// least) witness is kept. Guarded at `n <= 10`.
pub fn brute_force_wn(weights: &EdgeWeights) -> Result<ExactResult> {
    let n = weights.n();
    if n > 10 {
        return Err(Error::Precondition(format!("brute force guarded at n <= 10, got {n}")));
    }

    struct Search<'a> {
        w: &'a EdgeWeights,
        n: usize,
        used: Vec<bool>,
        stack: Vec<usize>,
        best: f64,
        witness: Vec<usize>,
    }

    impl Search<'_> {
        // extend from `cur` with accumulated value `acc`; candidates in
        // ascending order so completions enumerate lexicographically
        fn extend(&mut self, cur: usize, acc: f64) {
            for next in 2..=self.n {
                if self.used[next] {
                    continue;
                }
                let value = acc + self.w.weight(cur, next);
                if next == self.n {
                    if value > self.best {
                        self.best = value;
                        self.witness = self.stack.clone();
                        self.witness.push(self.n);
                    }
                } else {
                    self.used[next] = true;
                    self.stack.push(next);
                    self.extend(next, value);
                    self.stack.pop();
                    self.used[next] = false;
                }
            }
        }
    }

    let mut search = Search {
        w: weights,
        n,
        used: vec![false; n + 1],
        stack: vec![1],
        best: f64::NEG_INFINITY,
        witness: Vec::new(),
    };
    search.used[1] = true;
    search.extend(1, 0.0);
    Ok(ExactResult { value: search.best, witness: Path::new(search.witness)? })
}

/// Subset DP over a vertex window: best path from `source` to `sink` using
/// interior vertices from `interior` (each at most once). Returns the value
/// and witness sequence.
fn window_dp(
    weights: &EdgeWeights,
    source: usize,
    sink: usize,
    interior: &[usize],
) -> (f64, Vec<usize>) {
    let m = interior.len();
    if m == 0 {
        return (weights.weight(source, sink), vec![source, sink]);
    }
    let states = 1usize << m;
    // best[mask * m + v]: max value of a path source -> interior[v] visiting
    // exactly the interior vertices in mask
    let mut best = vec![f64::NEG_INFINITY; states * m];
    for v in 0..m {
        best[(1 << v) * m + v] = weights.weight(source, interior[v]);
    }
    for mask in 1..states {
        if mask.count_ones() < 2 {
            continue;
        }
        for v in 0..m {
            if mask & (1 << v) == 0 {
                continue;
            }
            let prev_mask = mask & !(1 << v);
            let mut acc = f64::NEG_INFINITY;
            let mut bits = prev_mask;
            while bits != 0 {
                let u = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                let cand = best[prev_mask * m + u] + weights.weight(interior[u], interior[v]);
                if cand > acc {
                    acc = cand;
                }
            }
            best[mask * m + v] = acc;
        }
    }

    let mut value = weights.weight(source, sink);
    let mut arg: Option<(usize, usize)> = None;
    for mask in 1..states {
        for v in 0..m {
            if mask & (1 << v) == 0 {
                continue;
            }
            let cand = best[mask * m + v] + weights.weight(interior[v], sink);
            if cand > value {
                value = cand;
                arg = Some((mask, v));
            }
        }
    }

    let mut rev = vec![sink];
    if let Some((mut mask, mut v)) = arg {
        rev.push(interior[v]);
        while mask.count_ones() > 1 {
            let prev_mask = mask & !(1 << v);
            let target = best[mask * m + v];
            let mut found = None;
            let mut bits = prev_mask;
            while bits != 0 {
                let u = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                if best[prev_mask * m + u] + weights.weight(interior[u], interior[v]) == target {
                    found = Some(u);
                    break;
                }
            }
            let u = found.expect("some predecessor achieves the DP value");
            rev.push(interior[u]);
            mask = prev_mask;
            v = u;
        }
    }
    rev.push(source);
    rev.reverse();
    (value, rev)
}

/// Exact `W_n` by subset DP over the interior vertices `{2, ..., n-1}`.
/// Guarded at `n <= 22` (the table holds `2^{n-2} (n-2)` states).
pub fn exact_wn(weights: &EdgeWeights) -> Result<ExactResult> {
    let n = weights.n();
    if n > 22 {
        return Err(Error::Precondition(format!("subset DP guarded at n <= 22, got {n}")));
    }
    let interior: Vec<usize> = (2..n).collect();
    let (value, witness) = window_dp(weights, 1, n, &interior);
    Ok(ExactResult { value, witness: Path::new(witness)? })
}

/// Largest passage time from `m + 1` to `k` inside the vertex window
/// `{m+1, ..., k}`. `exact_wmn(w, 0, n)` equals `exact_wn(w).value`; a
/// single-vertex window has value 0.
pub fn exact_wmn(weights: &EdgeWeights, m: usize, k: usize) -> Result<f64> {
    let n = weights.n();
    if m >= k || k > n {
        return Err(Error::Precondition(format!(
            "window requires 0 <= m < k <= n, got m={m}, k={k}, n={n}"
        )));
    }
    if k - m > 22 {
        return Err(Error::Precondition(format!("window size {} exceeds DP guard 22", k - m)));
    }
    if k - m == 1 {
        return Ok(0.0);
    }
    let interior: Vec<usize> = (m + 2..k).collect();
    let (value, _) = window_dp(weights, m + 1, k, &interior);
    Ok(value)
}
