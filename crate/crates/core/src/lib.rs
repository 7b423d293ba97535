//! Last passage percolation on the complete graph `K_n`.
//!
//! Edges of `K_n` carry positive i.i.d. passage times; `W_n` is the largest
//! total passage time over self-avoiding paths from vertex 1 to vertex `n`.
//! This crate provides:
//!
//! - [`weights`]: edge-weight laws (two-point, uniform, exponential, Pareto)
//!   with tail functions, essential suprema, and the threshold functions
//!   `f(n)`, `g(n)` used in the unbounded-support regime;
//! - [`graph`]: triangular storage for the full weight assignment on `K_n`,
//!   threshold subgraphs, and Bernoulli random graphs `G(n,p)`;
//! - [`dfs`]: the depth-first-search process as an explicit `(S, U, T, Ê)`
//!   state machine, with full traces and the long-path guarantee checker;
//! - [`paths`]: passage times, the surgery that turns any long path into a
//!   `1 -> n` self-avoiding path, and the threshold/DFS/surgery lower-bound
//!   pipeline;
//! - [`exact`]: exact `W_n` by exhaustive enumeration (tiny `n`) and by
//!   subset dynamic programming (small `n`);
//! - [`analysis`]: closed-form deviation and variance bounds, the `x̄(n)`
//!   root-finder, and seeded Monte Carlo campaigns.
//!
//! All randomness is inverse-transform over ChaCha streams so that a fixed
//! seed reproduces results bit-for-bit on any platform and at any degree of
//! parallelism.

pub mod analysis;
pub mod dfs;
pub mod error;
pub mod exact;
pub mod graph;
pub mod paths;
pub mod rng;
pub mod weights;

pub use error::{Error, Result};
pub use graph::{EdgeWeights, SimpleGraph};
pub use paths::Path;
pub use weights::{ExtendedReal, WeightDistribution};
