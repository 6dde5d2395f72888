//! Target-node selection in undirected graphs under short random walks.
//!
//! Given a graph and a budget `k`, the crate selects target nodes that
//! either minimize the total expected hitting time of length-bounded
//! random walks from the remaining nodes, or maximize the expected number
//! of nodes whose walk reaches a target. It provides:
//!
//! - exact dynamic-programming objectives with brute-force oracles
//!   ([`exact`]),
//! - unbiased Monte-Carlo estimators with Hoeffding sample-size bounds
//!   ([`sampling`]),
//! - plain and lazy greedy drivers over pluggable gain oracles
//!   ([`greedy`]),
//! - a linear-time approximate greedy over materialized walk samples
//!   ([`approx`]),
//! - the degree and neighbor-coverage baselines ([`baselines`]) and the
//!   evaluation metrics and sweeps that compare everything ([`eval`]).
//!
//! The `parallel` feature (on by default) runs walk batches and gain
//! evaluations on a rayon pool; disabling it yields a dependency-light
//! sequential build. Selections are bit-identical either way.

pub mod approx;
pub mod baselines;
pub mod error;
pub mod eval;
pub mod exact;
pub mod graph;
pub mod greedy;
pub mod rng;
pub mod sampling;
pub mod set;

#[doc(hidden)]
pub mod testutil;

pub use error::{Error, Result};
pub use exact::ProblemKind;
pub use graph::{Graph, IsolatedPolicy, ParseOptions};
pub use greedy::{GainOracle, SelectionResult};
pub use set::NodeSet;
