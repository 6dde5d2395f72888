//! Exact dynamic-programming computation of truncated hitting times and hit
//! probabilities, the two selection objectives built on them, and
//! brute-force enumeration oracles used as test references.

use num::rational::BigRational;
use num::traits::ToPrimitive;
use num::{BigInt, Zero};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::set::NodeSet;

/// Which per-node quantity a computation tracks.
///
/// `HittingTime` is the expected number of hops until a length-bounded walk
/// first reaches the target set (capped at the horizon). `HitProbability`
/// is the chance such a walk reaches the target set at all.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum ProblemKind {
    HittingTime,
    HitProbability,
}

/// Per-node table of hitting times or hit probabilities for one target set
/// at one horizon.
#[derive(Debug, Clone)]
pub struct HitProfile {
    pub kind: ProblemKind,
    pub horizon: u32,
    pub values: Vec<f64>,
    pub targets: NodeSet,
}

/// Evaluates the recursion for all nodes at horizon `walk_len`, using two
/// alternating length-n arrays rather than the full n-by-horizon table.
pub fn hit_profile(g: &Graph, targets: &NodeSet, walk_len: u32, kind: ProblemKind) -> HitProfile {
    let values = profile_values(g, targets, None, walk_len, kind);
    HitProfile {
        kind,
        horizon: walk_len,
        values,
        targets: targets.clone(),
    }
}

/// Per-horizon tables for `t = 0..=walk_len`. Debugging and property tests
/// only; costs the full table.
pub fn hit_profile_history(
    g: &Graph,
    targets: &NodeSet,
    walk_len: u32,
    kind: ProblemKind,
) -> Vec<Vec<f64>> {
    let n = g.n();
    let mut rows = Vec::with_capacity(walk_len as usize + 1);
    rows.push(base_row(n, targets, kind));
    for _ in 1..=walk_len {
        let next = step_row(g, targets, None, rows.last().unwrap(), kind);
        rows.push(next);
    }
    rows
}

fn base_row(n: usize, targets: &NodeSet, kind: ProblemKind) -> Vec<f64> {
    match kind {
        ProblemKind::HittingTime => vec![0.0; n],
        ProblemKind::HitProbability => (0..n as u32)
            .map(|u| if targets.contains(u) { 1.0 } else { 0.0 })
            .collect(),
    }
}

#[inline]
fn in_targets(targets: &NodeSet, extra: Option<u32>, u: u32) -> bool {
    targets.contains(u) || extra == Some(u)
}

fn step_row(
    g: &Graph,
    targets: &NodeSet,
    extra: Option<u32>,
    prev: &[f64],
    kind: ProblemKind,
) -> Vec<f64> {
    let n = g.n();
    let mut next = vec![0.0; n];
    for u in 0..n as u32 {
        if in_targets(targets, extra, u) {
            next[u as usize] = match kind {
                ProblemKind::HittingTime => 0.0,
                ProblemKind::HitProbability => 1.0,
            };
            continue;
        }
        let nbrs = g.neighbors(u);
        let avg = if nbrs.is_empty() {
            // Isolated node under the self-loop policy: the walk stays put.
            prev[u as usize]
        } else {
            nbrs.iter().map(|&w| prev[w as usize]).sum::<f64>() / nbrs.len() as f64
        };
        next[u as usize] = match kind {
            ProblemKind::HittingTime => 1.0 + avg,
            ProblemKind::HitProbability => avg,
        };
    }
    next
}

/// DP values with an optional extra target node, avoiding a set clone per
/// marginal-gain evaluation.
pub(crate) fn profile_values(
    g: &Graph,
    targets: &NodeSet,
    extra: Option<u32>,
    walk_len: u32,
    kind: ProblemKind,
) -> Vec<f64> {
    let n = g.n();
    let mut row = match kind {
        ProblemKind::HittingTime => vec![0.0; n],
        ProblemKind::HitProbability => (0..n as u32)
            .map(|u| if in_targets(targets, extra, u) { 1.0 } else { 0.0 })
            .collect(),
    };
    for _ in 1..=walk_len {
        row = step_row(g, targets, extra, &row, kind);
    }
    row
}

/// Expected hops for the walk from `u` to first reach `v`, truncated at
/// `walk_len`.
pub fn hitting_time_pair(g: &Graph, u: u32, v: u32, walk_len: u32) -> f64 {
    let targets = NodeSet::from_ids(g.n(), [v]);
    profile_values(g, &targets, None, walk_len, ProblemKind::HittingTime)[u as usize]
}

/// First objective: `n * walk_len` minus the total hitting time from the
/// non-target nodes. Zero for an empty target set; `n * walk_len` for the
/// full set.
pub fn objective_f1(g: &Graph, targets: &NodeSet, walk_len: u32) -> f64 {
    objective_with_extra(g, targets, None, walk_len, ProblemKind::HittingTime)
}

/// Second objective: expected number of nodes whose walk reaches the target
/// set (target members count as hits).
pub fn objective_f2(g: &Graph, targets: &NodeSet, walk_len: u32) -> f64 {
    objective_with_extra(g, targets, None, walk_len, ProblemKind::HitProbability)
}

pub fn objective(g: &Graph, targets: &NodeSet, walk_len: u32, kind: ProblemKind) -> f64 {
    objective_with_extra(g, targets, None, walk_len, kind)
}

pub(crate) fn objective_with_extra(
    g: &Graph,
    targets: &NodeSet,
    extra: Option<u32>,
    walk_len: u32,
    kind: ProblemKind,
) -> f64 {
    let values = profile_values(g, targets, extra, walk_len, kind);
    match kind {
        ProblemKind::HittingTime => {
            let total: f64 = values
                .iter()
                .enumerate()
                .filter(|&(u, _)| !in_targets(targets, extra, u as u32))
                .map(|(_, &h)| h)
                .sum();
            g.n() as f64 * walk_len as f64 - total
        }
        ProblemKind::HitProbability => values.iter().sum(),
    }
}

/// Guard for the enumeration oracles: total walk prefixes explored.
const ENUMERATION_LIMIT: u64 = 10_000_000;

/// Exact expected truncated hitting time by enumerating every walk prefix
/// with its product probability, accumulated in exact rational arithmetic.
/// The independent reference for [`hit_profile`].
pub fn brute_force_hitting(g: &Graph, u: u32, targets: &NodeSet, walk_len: u32) -> Result<f64> {
    enumerate(g, u, targets, walk_len, ProblemKind::HittingTime)
}

/// Exact hit probability by the same enumeration.
pub fn brute_force_hit_prob(g: &Graph, u: u32, targets: &NodeSet, walk_len: u32) -> Result<f64> {
    enumerate(g, u, targets, walk_len, ProblemKind::HitProbability)
}

/// Size of the walk-prefix tree from `u`, saturating. Upper-bounds the
/// enumeration work (target pruning only shrinks it).
fn prefix_tree_size(g: &Graph, u: u32, walk_len: u32) -> u64 {
    let n = g.n();
    let mut counts = vec![0u64; n];
    counts[u as usize] = 1;
    let mut total: u64 = 1;
    for _ in 0..walk_len {
        let mut next = vec![0u64; n];
        for w in 0..n {
            let c = counts[w];
            if c == 0 {
                continue;
            }
            let nbrs = g.neighbors(w as u32);
            if nbrs.is_empty() {
                next[w] = next[w].saturating_add(c);
                continue;
            }
            for &x in nbrs {
                next[x as usize] = next[x as usize].saturating_add(c);
            }
        }
        counts = next;
        total = total.saturating_add(counts.iter().fold(0u64, |a, &b| a.saturating_add(b)));
        if total > ENUMERATION_LIMIT {
            return total;
        }
    }
    total
}

/// Visits every walk prefix, carrying the path probability as an exact
/// `1 / denominator` with the degree product as denominator. Leaf
/// contributions accumulate per denominator so rational arithmetic only
/// happens once per distinct denominator at the end.
struct Enumerator<'a> {
    g: &'a Graph,
    targets: &'a NodeSet,
    walk_len: u32,
    kind: ProblemKind,
    /// denominator -> summed numerators (hops for hitting time, path count
    /// for hit probability).
    sums: std::collections::HashMap<u64, u128>,
}

impl Enumerator<'_> {
    fn add(&mut self, denom: u64, numer: u128) {
        if numer > 0 {
            *self.sums.entry(denom).or_insert(0) += numer;
        }
    }

    fn run(&mut self, node: u32, hops: u32, denom: u64) {
        if self.targets.contains(node) {
            match self.kind {
                ProblemKind::HittingTime => self.add(denom, hops as u128),
                ProblemKind::HitProbability => self.add(denom, 1),
            }
            return;
        }
        if hops == self.walk_len {
            if self.kind == ProblemKind::HittingTime {
                self.add(denom, self.walk_len as u128);
            }
            return;
        }
        let nbrs = self.g.neighbors(node);
        if nbrs.is_empty() {
            // Self-loop policy: the walk is pinned here until truncation.
            if self.kind == ProblemKind::HittingTime {
                self.add(denom, self.walk_len as u128);
            }
            return;
        }
        let denom = denom * nbrs.len() as u64;
        for &w in nbrs {
            self.run(w, hops + 1, denom);
        }
    }
}

fn enumerate(g: &Graph, u: u32, targets: &NodeSet, walk_len: u32, kind: ProblemKind) -> Result<f64> {
    let paths = prefix_tree_size(g, u, walk_len);
    if paths > ENUMERATION_LIMIT {
        return Err(Error::EnumerationTooLarge {
            paths,
            limit: ENUMERATION_LIMIT,
        });
    }
    // Any single path's degree product is at most the leaf count, so the
    // u64 denominators cannot overflow under the guard.
    let mut e = Enumerator {
        g,
        targets,
        walk_len,
        kind,
        sums: std::collections::HashMap::new(),
    };
    e.run(u, 0, 1);
    let mut acc = BigRational::zero();
    for (denom, numer) in e.sums {
        acc += BigRational::new(BigInt::from(numer), BigInt::from(denom));
    }
    Ok(acc.to_f64().expect("rational fits in f64"))
}

/// Guard for exhaustive subset search.
const SUBSET_LIMIT: u64 = 1_000_000;

/// Exhaustive maximizer over all k-subsets; ties break toward the
/// lexicographically smallest subset. Test oracle for the greedy bound.
pub fn brute_force_optimal(
    g: &Graph,
    k: usize,
    walk_len: u32,
    kind: ProblemKind,
) -> Result<(Vec<u32>, f64)> {
    let n = g.n();
    let k = k.min(n);
    if k == 0 {
        return Ok((Vec::new(), 0.0));
    }
    let mut space = 1u64;
    for i in 0..k as u64 {
        space = space.saturating_mul(n as u64 - i) / (i + 1);
        if space > SUBSET_LIMIT {
            return Err(Error::SubsetSpaceTooLarge {
                n,
                k,
                limit: SUBSET_LIMIT,
            });
        }
    }
    use itertools::Itertools;
    let mut best: Option<(Vec<u32>, f64)> = None;
    // Lexicographic combination order plus strict improvement keeps the
    // smallest subset on ties.
    for combo in (0..n as u32).combinations(k) {
        let set = NodeSet::from_ids(n, combo.iter().copied());
        let value = objective(g, &set, walk_len, kind);
        if best.as_ref().is_none_or(|(_, b)| value > *b) {
            best = Some((combo, value));
        }
    }
    Ok(best.expect("k >= 1 implies at least one subset"))
}
