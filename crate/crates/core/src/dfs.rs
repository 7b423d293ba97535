//! The depth-first-search process as an explicit state machine.
//!
//! The process maintains three vertex sets — `S` (exploration complete),
//! `U` (the active stack, which always spans a path), `T` (unvisited) — and
//! the set `Ê` of explored vertex pairs of the complete graph. One step
//! either checks a single new pair (moving the far endpoint from `T` onto
//! the stack when the pair is an edge and the endpoint unvisited), retreats
//! the stack top into `S`, or opens a new epoch by moving the smallest
//! unvisited vertex onto the empty stack.
//!
//! The trace records the step sequence in delta form (one compact event per
//! step); full `(S, U, T, Ê)` states are reconstructed on demand by replay,
//! so golden tests see every state while large campaigns stay within memory
//! bounds. The run always stops at `N = n + (number of components) + C(n,2)`
//! steps.

use std::io::Write;

use crate::error::{Error, Result};
use crate::graph::{pair_count, pair_index, SimpleGraph};
use crate::paths::Path;

/// One transition of the process; `events[k]` leads from state `k` to
/// state `k + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepEvent {
    /// Pair `<x, y>` entered `Ê`; `moved` records whether `y` went from `T`
    /// onto the stack (pair is an edge and `y` was unvisited).
    Explore { x: u32, y: u32, moved: bool },
    /// Stack top `x` had no unexplored pair left and moved to `S`.
    Retreat { x: u32 },
    /// The stack was empty; `v`, the smallest unvisited vertex, starts a
    /// new epoch.
    EpochStart { v: u32 },
}

/// A maximal interval between consecutive emptyings of the stack; its
/// vertices form one connected component of the input graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Epoch {
    /// State index at which the stack received the epoch's first vertex.
    pub start: usize,
    /// State index at which the stack emptied again.
    pub end: usize,
    /// The component's vertices, ascending.
    pub component: Vec<usize>,
}

/// Full `(S, U, T, Ê)` snapshot at one state index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DfsState {
    pub step: usize,
    /// Completed vertices, ascending.
    pub s: Vec<usize>,
    /// The stack in insertion order; spans a path in the input graph.
    pub u: Vec<usize>,
    /// Unvisited vertices, ascending.
    pub t: Vec<usize>,
    /// Explored pairs `(i, j)`, `i < j`, in insertion order.
    pub ehat: Vec<(usize, usize)>,
}

/// The record of one DFS run.
#[derive(Debug, Clone, PartialEq)]
pub struct DfsTrace {
    n: usize,
    events: Vec<StepEvent>,
    epochs: Vec<Epoch>,
    peak_stack: Vec<usize>,
    peak_step: usize,
}

impl DfsTrace {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Total step count `N`; states are indexed `0..=N`.
    pub fn step_count(&self) -> usize {
        self.events.len()
    }

    pub fn events(&self) -> &[StepEvent] {
        &self.events
    }

    pub fn epochs(&self) -> &[Epoch] {
        &self.epochs
    }

    /// The stack content at the first state maximizing `|U|`.
    pub fn peak_stack(&self) -> &[usize] {
        &self.peak_stack
    }

    /// State index of the first `|U|` maximum.
    pub fn peak_step(&self) -> usize {
        self.peak_step
    }

    /// Reconstructs every state by replaying the events; `visit` sees states
    /// `0..=N` in order.
    pub fn replay(&self, mut visit: impl FnMut(&DfsState)) {
        let n = self.n;
        let mut s: Vec<usize> = Vec::new();
        let mut u: Vec<usize> = Vec::new();
        let mut t: Vec<usize> = (1..=n).collect();
        let mut ehat: Vec<(usize, usize)> = Vec::new();
        let snapshot = |step: usize,
                            s: &Vec<usize>,
                            u: &Vec<usize>,
                            t: &Vec<usize>,
                            ehat: &Vec<(usize, usize)>| DfsState {
            step,
            s: s.clone(),
            u: u.clone(),
            t: t.clone(),
            ehat: ehat.clone(),
        };
        visit(&snapshot(0, &s, &u, &t, &ehat));
        for (k, ev) in self.events.iter().enumerate() {
            match *ev {
                StepEvent::Explore { x, y, moved } => {
                    let (a, b) = ((x as usize).min(y as usize), (x as usize).max(y as usize));
                    ehat.push((a, b));
                    if moved {
                        let y = y as usize;
                        t.retain(|&v| v != y);
                        u.push(y);
                    }
                }
                StepEvent::Retreat { x } => {
                    let popped = u.pop();
                    debug_assert_eq!(popped, Some(x as usize));
                    let pos = s.partition_point(|&v| v < x as usize);
                    s.insert(pos, x as usize);
                }
                StepEvent::EpochStart { v } => {
                    let v = v as usize;
                    t.retain(|&w| w != v);
                    u.push(v);
                }
            }
            visit(&snapshot(k + 1, &s, &u, &t, &ehat));
        }
    }

    /// All states, materialized. Memory is `O(N (n + |Ê|))`; intended for
    /// small instances and golden tests.
    pub fn states(&self) -> Vec<DfsState> {
        let mut out = Vec::with_capacity(self.step_count() + 1);
        self.replay(|st| out.push(st.clone()));
        out
    }

    /// Writes the trace table: header `step,S,U,T,Ehat`, one row per state,
    /// sets as semicolon-joined ascending lists (`U` in stack order, `Ê` in
    /// insertion order with pairs as `i-j`).
    pub fn write_csv(&self, out: &mut impl Write) -> Result<()> {
        let mut err: Option<std::io::Error> = None;
        writeln!(out, "step,S,U,T,Ehat")?;
        self.replay(|st| {
            if err.is_some() {
                return;
            }
            let join = |vs: &[usize]| {
                vs.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(";")
            };
            let ehat = st
                .ehat
                .iter()
                .map(|(i, j)| format!("{i}-{j}"))
                .collect::<Vec<_>>()
                .join(";");
            if let Err(e) = writeln!(
                out,
                "{},{},{},{},{}",
                st.step,
                join(&st.s),
                join(&st.u),
                join(&st.t),
                ehat
            ) {
                err = Some(e);
            }
        });
        match err {
            Some(e) => Err(e.into()),
            None => Ok(()),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Loc {
    S,
    U,
    T,
}

/// Runs the process on `g` and records the full trace.
///
/// Transition rules, with all ties broken by vertex order:
/// 1. stack nonempty with top `x`: explore the smallest `y` (over all
///    vertices, whatever set they sit in) whose pair `<x, y>` is new; `y`
///    additionally moves from `T` onto the stack in the same step iff the
///    pair is an edge and `y` is unvisited;
/// 2. stack top exhausted: retreat it into `S`;
/// 3. stack empty: the smallest unvisited vertex starts a new epoch;
/// 4. stop when stack and `T` are both empty.
pub fn run_dfs(g: &SimpleGraph) -> DfsTrace {
    let n = g.n();
    let mut loc = vec![Loc::T; n + 1];
    let mut u_stack: Vec<usize> = Vec::new();
    let mut explored = vec![0u64; pair_count(n).div_ceil(64)];
    // smallest y not yet ruled out for each potential stack top
    let mut next_candidate: Vec<usize> = vec![1; n + 1];
    let mut t_scan = 1usize;

    let mut events: Vec<StepEvent> = Vec::new();
    let mut epochs: Vec<Epoch> = Vec::new();
    let mut epoch_start = 0usize;
    let mut epoch_component: Vec<usize> = Vec::new();
    let mut peak_stack: Vec<usize> = Vec::new();
    let mut peak_step = 0usize;

    let is_explored = |bits: &[u64], i: usize, j: usize| {
        let idx = pair_index(n, i.min(j), i.max(j));
        bits[idx / 64] & (1 << (idx % 64)) != 0
    };

    loop {
        if let Some(&x) = u_stack.last() {
            let mut y = next_candidate[x];
            while y <= n && (y == x || is_explored(&explored, x, y)) {
                y += 1;
            }
            next_candidate[x] = y;
            if y <= n {
                let idx = pair_index(n, x.min(y), x.max(y));
                explored[idx / 64] |= 1 << (idx % 64);
                next_candidate[x] = y + 1;
                let moved = loc[y] == Loc::T && g.has_edge(x, y);
                if moved {
                    loc[y] = Loc::U;
                    u_stack.push(y);
                    epoch_component.push(y);
                }
                events.push(StepEvent::Explore { x: x as u32, y: y as u32, moved });
            } else {
                u_stack.pop();
                loc[x] = Loc::S;
                events.push(StepEvent::Retreat { x: x as u32 });
                if u_stack.is_empty() {
                    epoch_component.sort_unstable();
                    epochs.push(Epoch {
                        start: epoch_start,
                        end: events.len(),
                        component: std::mem::take(&mut epoch_component),
                    });
                }
            }
        } else {
            while t_scan <= n && loc[t_scan] != Loc::T {
                t_scan += 1;
            }
            if t_scan > n {
                break;
            }
            let v = t_scan;
            loc[v] = Loc::U;
            u_stack.push(v);
            epoch_start = events.len() + 1;
            epoch_component.push(v);
            events.push(StepEvent::EpochStart { v: v as u32 });
        }
        if u_stack.len() > peak_stack.len() {
            peak_stack = u_stack.clone();
            peak_step = events.len();
        }
    }

    debug_assert_eq!(events.len(), n + epochs.len() + pair_count(n));
    DfsTrace { n, events, epochs, peak_stack, peak_step }
}

/// The stack at the first `|U|` maximum, as a path (property P3: the stack
/// always spans a path, so the result has `max |U_t| - 1` edges).
pub fn longest_u_excursion(trace: &DfsTrace) -> Path {
    Path::new(trace.peak_stack().to_vec()).expect("stack vertices are distinct")
}

/// Exhaustively checks whether every pair of disjoint size-`k` vertex sets
/// has at least one crossing edge.
///
/// Guard: `C(n,k) * C(n-k,k) <= 10^8` ordered set pairs (and `n <= 64` for
/// the bitmask enumeration).
pub fn check_st_edge_property(g: &SimpleGraph, k: usize) -> Result<bool> {
    let n = g.n();
    if k < 1 || 2 * k > n {
        return Err(Error::Precondition(format!(
            "check_st_edge_property requires 1 <= k <= n/2, got k={k}, n={n}"
        )));
    }
    if n > 64 {
        return Err(Error::Precondition(format!("enumeration supports n <= 64, got {n}")));
    }
    let pairs_to_check = binomial(n, k) * binomial(n - k, k);
    if pairs_to_check > 1e8 {
        return Err(Error::Precondition(format!(
            "enumeration guard exceeded: C({n},{k})*C({},{k}) = {pairs_to_check:.3e} > 1e8",
            n - k
        )));
    }

    let adj: Vec<u64> = (0..=n).map(|v| if v == 0 { 0 } else { g.neighbor_mask(v) }).collect();

    // k-subsets of [n] as bitmasks, in Gosper order
    for s_mask in k_subsets(n, k) {
        // complement vertices available for T
        let comp: Vec<usize> = (1..=n).filter(|v| s_mask & (1 << (v - 1)) == 0).collect();
        for t_idx in k_subsets(comp.len(), k) {
            let mut t_mask = 0u64;
            let mut bits = t_idx;
            while bits != 0 {
                let b = bits.trailing_zeros() as usize;
                t_mask |= 1 << (comp[b] - 1);
                bits &= bits - 1;
            }
            let mut crossing = false;
            let mut s_bits = s_mask;
            while s_bits != 0 {
                let v = s_bits.trailing_zeros() as usize + 1;
                if adj[v] & t_mask != 0 {
                    crossing = true;
                    break;
                }
                s_bits &= s_bits - 1;
            }
            if !crossing {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Guaranteed path length `n - 2k + 1` when the crossing-edge hypothesis
/// holds for `k`.
pub fn prop31_guarantee(n: usize, k: usize) -> Result<i64> {
    if k < 1 || k >= n {
        return Err(Error::Precondition(format!(
            "prop31_guarantee requires 1 <= k < n, got k={k}, n={n}"
        )));
    }
    Ok(n as i64 - 2 * k as i64 + 1)
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut v = 1.0f64;
    for i in 0..k {
        v = v * (n - i) as f64 / (i + 1) as f64;
    }
    v
}

/// All size-`k` subsets of `{0, .., m-1}` as bitmasks (Gosper's hack).
fn k_subsets(m: usize, k: usize) -> impl Iterator<Item = u64> {
    debug_assert!(k >= 1 && k <= m && m <= 64);
    let limit: u128 = 1u128 << m;
    let mut cur: u128 = (1u128 << k) - 1;
    std::iter::from_fn(move || {
        if cur >= limit {
            return None;
        }
        let out = cur as u64;
        let c = cur & cur.wrapping_neg();
        let r = cur + c;
        cur = (((r ^ cur) >> 2) / c) | r;
        Some(out)
    })
}
