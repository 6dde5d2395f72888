//! Length-bounded random-walk engine, unbiased objective estimators, and
//! Hoeffding sample-size calculators.
//!
//! Walks for a `(node, replicate)` pair always come from the stream
//! [`WalkRng::for_node_replicate`], so estimates are reproducible across
//! evaluation orders and thread counts. All tallies are integers, which
//! makes the aggregated estimates bit-stable even in parallel mode.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exact::ProblemKind;
use crate::graph::Graph;
use crate::rng::WalkRng;
use crate::set::NodeSet;

/// One sampled walk: the source plus the nodes visited at hops `1..=len`.
/// Shorter than the horizon only when a self-loop-policy isolated node
/// pins the walk in place.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Walk {
    pub source: u32,
    pub steps: Vec<u32>,
}

/// Runs one walk of at most `walk_len` hops from `u`.
pub fn run_walk(g: &Graph, u: u32, walk_len: u32, rng: &mut WalkRng) -> Walk {
    let mut steps = Vec::with_capacity(walk_len as usize);
    let mut here = u;
    for _ in 0..walk_len {
        match g.random_neighbor(here, rng) {
            Some(next) => {
                steps.push(next);
                here = next;
            }
            None => break,
        }
    }
    Walk { source: u, steps }
}

/// First hop (1-based) at which the walk from `u` enters `targets`, if any.
#[inline]
fn first_hit(g: &Graph, u: u32, targets: &NodeSet, walk_len: u32, rng: &mut WalkRng) -> Option<u32> {
    let mut here = u;
    for hop in 1..=walk_len {
        match g.random_neighbor(here, rng) {
            Some(next) => {
                if targets.contains(next) {
                    return Some(hop);
                }
                here = next;
            }
            None => return None,
        }
    }
    None
}

/// Hit count and summed first-hit hops over `samples` walks from one source.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SourceTally {
    pub node: u32,
    pub hits: u32,
    pub hop_sum: u64,
}

fn tally_source(g: &Graph, u: u32, targets: &NodeSet, walk_len: u32, samples: u32, seed: u64) -> SourceTally {
    let mut tally = SourceTally {
        node: u,
        ..Default::default()
    };
    for rep in 0..samples {
        let mut rng = WalkRng::for_node_replicate(seed, u, rep);
        if let Some(hop) = first_hit(g, u, targets, walk_len, &mut rng) {
            tally.hits += 1;
            tally.hop_sum += hop as u64;
        }
    }
    tally
}

#[inline]
fn mean_hitting_time(tally: &SourceTally, samples: u32, walk_len: u32) -> f64 {
    // (sum of first-hit hops + misses * horizon) / samples
    (tally.hop_sum + (samples - tally.hits) as u64 * walk_len as u64) as f64 / samples as f64
}

/// Monte-Carlo estimate of the expected truncated hitting time from `u` to
/// `targets`: the mean first-hit hop with misses counted at the horizon.
pub fn estimate_hitting(
    g: &Graph,
    u: u32,
    targets: &NodeSet,
    walk_len: u32,
    samples: u32,
    seed: u64,
) -> f64 {
    debug_assert!(samples >= 1);
    debug_assert!(!targets.contains(u));
    let tally = tally_source(g, u, targets, walk_len, samples, seed);
    mean_hitting_time(&tally, samples, walk_len)
}

/// Unbiased estimates of both objectives from one batch of walks.
#[derive(Debug, Clone)]
pub struct ObjectiveEstimate {
    pub f1_hat: f64,
    pub f2_hat: f64,
    pub samples_used: u32,
    /// Per-source tallies for the non-target nodes, in ascending node order.
    pub per_node: Vec<SourceTally>,
}

/// Runs `samples` walks from every non-target node and aggregates both
/// objective estimates. Exact (zero-variance) for the empty and full
/// target sets.
pub fn estimate_objectives(
    g: &Graph,
    targets: &NodeSet,
    walk_len: u32,
    samples: u32,
    seed: u64,
) -> ObjectiveEstimate {
    assert!(samples >= 1, "need at least one sample per node");
    let n = g.n();
    let sources: Vec<u32> = (0..n as u32).filter(|&u| !targets.contains(u)).collect();
    let per_node = map_sources(&sources, |u| tally_source(g, u, targets, walk_len, samples, seed));

    let mut hop_total: u64 = 0;
    let mut hit_total: u64 = 0;
    for t in &per_node {
        hop_total += t.hop_sum + (samples - t.hits) as u64 * walk_len as u64;
        hit_total += t.hits as u64;
    }
    let time_sum = hop_total as f64 / samples as f64;
    let f1_hat = n as f64 * walk_len as f64 - time_sum;
    let f2_hat = hit_total as f64 / samples as f64 + targets.len() as f64;
    ObjectiveEstimate {
        f1_hat,
        f2_hat,
        samples_used: samples,
        per_node,
    }
}

/// Objective estimate under an optional extra target; shared by the
/// sampled gain oracle so both sides of a marginal difference reuse the
/// same walk streams.
pub(crate) fn sampled_objective_value(
    g: &Graph,
    targets: &NodeSet,
    extra: Option<u32>,
    walk_len: u32,
    samples: u32,
    seed: u64,
    kind: ProblemKind,
) -> f64 {
    let n = g.n();
    let in_set = |u: u32| targets.contains(u) || extra == Some(u);
    let sources: Vec<u32> = (0..n as u32).filter(|&u| !in_set(u)).collect();
    let member_count = targets.len() + extra.map_or(0, |u| usize::from(!targets.contains(u)));
    let tallies = map_sources(&sources, |u| {
        let mut tally = SourceTally {
            node: u,
            ..Default::default()
        };
        for rep in 0..samples {
            let mut rng = WalkRng::for_node_replicate(seed, u, rep);
            let mut here = u;
            for hop in 1..=walk_len {
                match g.random_neighbor(here, &mut rng) {
                    Some(next) => {
                        if in_set(next) {
                            tally.hits += 1;
                            tally.hop_sum += hop as u64;
                            break;
                        }
                        here = next;
                    }
                    None => break,
                }
            }
        }
        tally
    });
    match kind {
        ProblemKind::HittingTime => {
            let mut hop_total: u64 = 0;
            for t in &tallies {
                hop_total += t.hop_sum + (samples - t.hits) as u64 * walk_len as u64;
            }
            n as f64 * walk_len as f64 - hop_total as f64 / samples as f64
        }
        ProblemKind::HitProbability => {
            let hit_total: u64 = tallies.iter().map(|t| t.hits as u64).sum();
            hit_total as f64 / samples as f64 + member_count as f64
        }
    }
}

#[cfg(feature = "parallel")]
fn map_sources<F>(sources: &[u32], f: F) -> Vec<SourceTally>
where
    F: Fn(u32) -> SourceTally + Sync,
{
    sources.par_iter().map(|&u| f(u)).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_sources<F>(sources: &[u32], f: F) -> Vec<SourceTally>
where
    F: Fn(u32) -> SourceTally,
{
    sources.iter().map(|&u| f(u)).collect()
}

fn check_unit_interval(name: &str, x: f64) -> Result<()> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "{name} must lie strictly between 0 and 1, got {x}"
        )));
    }
    Ok(())
}

/// Samples per node sufficient for the first objective's estimate to stay
/// within `eps * (n - s) * walk_len` of the truth with probability at
/// least `1 - delta` (Hoeffding plus a union bound over sources). Natural
/// log; clamped to at least 1.
pub fn sample_size_f1(eps: f64, delta: f64, n: usize, s: usize) -> Result<u64> {
    check_unit_interval("eps", eps)?;
    if delta <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "delta must be positive, got {delta}"
        )));
    }
    if s >= n {
        return Err(Error::InvalidParameter(format!(
            "target size {s} must be smaller than node count {n}"
        )));
    }
    let raw = ((n - s) as f64 / delta).ln() / (2.0 * eps * eps);
    Ok((raw.ceil().max(1.0)) as u64)
}

/// Same bound for the second objective, with `n` sources.
pub fn sample_size_f2(eps: f64, delta: f64, n: usize) -> Result<u64> {
    check_unit_interval("eps", eps)?;
    if delta <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "delta must be positive, got {delta}"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("node count must be positive".into()));
    }
    let raw = (n as f64 / delta).ln() / (2.0 * eps * eps);
    Ok((raw.ceil().max(1.0)) as u64)
}
