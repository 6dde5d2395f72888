//! Budgeted greedy selection over pluggable marginal-gain oracles, with an
//! optional lazy (stale-bound priority queue) evaluation strategy.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use serde::Serialize;

use crate::approx::{self, GainState, WalkSampleIndex};
use crate::error::Result;
use crate::exact::{self, ProblemKind};
use crate::graph::Graph;
use crate::rng::mix2;
use crate::sampling;
use crate::set::NodeSet;

const ROUND_SALT: u64 = 0x726f_756e_645f;
const TRACE_SALT: u64 = 0x7472_6163_655f;

/// Parameter echo carried into every selection artifact.
#[derive(Debug, Clone, Serialize)]
pub struct SelectConfig {
    pub algorithm: String,
    pub k: u32,
    pub walk_len: u32,
    pub samples: Option<u32>,
    pub seed: Option<u64>,
    pub lazy: bool,
    pub trace: bool,
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct PhaseTimings {
    pub index_ms: u64,
    pub select_ms: u64,
}

/// Outcome of a selection run: chosen nodes in round order, the winning
/// gain per round, and bookkeeping for reproducibility checks.
#[derive(Debug, Clone, Serialize)]
pub struct SelectionResult {
    pub config: SelectConfig,
    pub selected: Vec<u32>,
    pub gains: Vec<f64>,
    pub objective_trace: Option<Vec<f64>>,
    pub oracle_calls: u64,
    pub elapsed: PhaseTimings,
    pub warnings: Vec<String>,
}

impl SelectionResult {
    /// Selected nodes translated back to the input's original IDs.
    pub fn selected_original(&self, g: &Graph) -> Vec<u64> {
        self.selected.iter().map(|&u| g.original_id(u)).collect()
    }
}

/// A marginal-gain evaluator. Exact kinds recompute the objective by DP,
/// sampled kinds estimate both sides of the difference with shared
/// per-round walk streams, and indexed kinds read a materialized
/// walk-sample index.
pub enum GainOracle {
    Exact {
        kind: ProblemKind,
        walk_len: u32,
        round_base: f64,
    },
    Sampled {
        kind: ProblemKind,
        walk_len: u32,
        samples: u32,
        seed: u64,
        round_seed: u64,
        round_base: f64,
    },
    Indexed {
        index: WalkSampleIndex,
        state: GainState,
        index_ms: u64,
    },
}

impl GainOracle {
    pub fn exact_f1(walk_len: u32) -> Self {
        GainOracle::Exact {
            kind: ProblemKind::HittingTime,
            walk_len,
            round_base: 0.0,
        }
    }

    pub fn exact_f2(walk_len: u32) -> Self {
        GainOracle::Exact {
            kind: ProblemKind::HitProbability,
            walk_len,
            round_base: 0.0,
        }
    }

    pub fn sampled_f1(walk_len: u32, samples: u32, seed: u64) -> Self {
        GainOracle::Sampled {
            kind: ProblemKind::HittingTime,
            walk_len,
            samples,
            seed,
            round_seed: 0,
            round_base: 0.0,
        }
    }

    pub fn sampled_f2(walk_len: u32, samples: u32, seed: u64) -> Self {
        GainOracle::Sampled {
            kind: ProblemKind::HitProbability,
            walk_len,
            samples,
            seed,
            round_seed: 0,
            round_base: 0.0,
        }
    }

    /// Builds the walk-sample index up front; gains then come from the
    /// index instead of fresh walks.
    pub fn indexed(
        g: &Graph,
        walk_len: u32,
        samples: u32,
        seed: u64,
        kind: ProblemKind,
    ) -> Result<Self> {
        let t0 = Instant::now();
        let index = approx::build_index(g, walk_len, samples, seed, kind)?;
        let index_ms = t0.elapsed().as_millis() as u64;
        let state = GainState::new(&index);
        Ok(GainOracle::Indexed {
            index,
            state,
            index_ms,
        })
    }

    pub fn label(&self) -> &'static str {
        match self {
            GainOracle::Exact { kind: ProblemKind::HittingTime, .. } => "dpf1",
            GainOracle::Exact { kind: ProblemKind::HitProbability, .. } => "dpf2",
            GainOracle::Sampled { kind: ProblemKind::HittingTime, .. } => "samplef1",
            GainOracle::Sampled { kind: ProblemKind::HitProbability, .. } => "samplef2",
            GainOracle::Indexed { index, .. } => match index.kind() {
                ProblemKind::HittingTime => "approxf1",
                ProblemKind::HitProbability => "approxf2",
            },
        }
    }

    pub fn kind(&self) -> ProblemKind {
        match self {
            GainOracle::Exact { kind, .. } | GainOracle::Sampled { kind, .. } => *kind,
            GainOracle::Indexed { index, .. } => index.kind(),
        }
    }

    fn walk_len(&self) -> u32 {
        match self {
            GainOracle::Exact { walk_len, .. } | GainOracle::Sampled { walk_len, .. } => *walk_len,
            GainOracle::Indexed { index, .. } => index.walk_len(),
        }
    }

    fn samples(&self) -> Option<u32> {
        match self {
            GainOracle::Exact { .. } => None,
            GainOracle::Sampled { samples, .. } => Some(*samples),
            GainOracle::Indexed { index, .. } => Some(index.replicates()),
        }
    }

    fn seed(&self) -> Option<u64> {
        match self {
            GainOracle::Exact { .. } => None,
            GainOracle::Sampled { seed, .. } => Some(*seed),
            GainOracle::Indexed { index, .. } => index.seed(),
        }
    }

    fn index_ms(&self) -> u64 {
        match self {
            GainOracle::Indexed { index_ms, .. } => *index_ms,
            _ => 0,
        }
    }

    /// Caches whatever the round's gains are measured against: the current
    /// objective value for exact kinds, the estimate under this round's
    /// shared walk streams for sampled kinds.
    fn begin_round(&mut self, g: &Graph, selected: &NodeSet, round: u32) {
        match self {
            GainOracle::Exact {
                kind,
                walk_len,
                round_base,
            } => {
                *round_base = exact::objective(g, selected, *walk_len, *kind);
            }
            GainOracle::Sampled {
                kind,
                walk_len,
                samples,
                seed,
                round_seed,
                round_base,
            } => {
                *round_seed = mix2(*seed, ROUND_SALT ^ round as u64);
                *round_base = sampling::sampled_objective_value(
                    g, selected, None, *walk_len, *samples, *round_seed, *kind,
                );
            }
            GainOracle::Indexed { .. } => {}
        }
    }

    /// Marginal gain of adding `candidate`. Read-only; safe to call
    /// concurrently within a round.
    fn gain(&self, g: &Graph, selected: &NodeSet, candidate: u32) -> f64 {
        match self {
            GainOracle::Exact {
                kind,
                walk_len,
                round_base,
            } => {
                exact::objective_with_extra(g, selected, Some(candidate), *walk_len, *kind)
                    - round_base
            }
            GainOracle::Sampled {
                kind,
                walk_len,
                samples,
                round_seed,
                round_base,
                ..
            } => {
                sampling::sampled_objective_value(
                    g,
                    selected,
                    Some(candidate),
                    *walk_len,
                    *samples,
                    *round_seed,
                    *kind,
                ) - round_base
            }
            GainOracle::Indexed { index, state, .. } => approx::approx_gain(index, state, candidate),
        }
    }

    fn commit(&mut self, winner: u32) -> Result<()> {
        if let GainOracle::Indexed { index, state, .. } = self {
            approx::apply_update(index, state, winner)?;
        }
        Ok(())
    }

    /// Objective value of the current selection under this oracle's own
    /// evaluation mode; used for the optional per-round trace.
    pub fn objective(&self, g: &Graph, selected: &NodeSet, round: u32) -> f64 {
        match self {
            GainOracle::Exact { kind, walk_len, .. } => {
                exact::objective(g, selected, *walk_len, *kind)
            }
            GainOracle::Sampled {
                kind,
                walk_len,
                samples,
                seed,
                ..
            } => sampling::sampled_objective_value(
                g,
                selected,
                None,
                *walk_len,
                *samples,
                mix2(*seed, TRACE_SALT ^ round as u64),
                *kind,
            ),
            GainOracle::Indexed { state, .. } => state.objective_estimate(),
        }
    }

    fn config(&self, k: u32, lazy: bool, trace: bool) -> SelectConfig {
        SelectConfig {
            algorithm: self.label().to_string(),
            k,
            walk_len: self.walk_len(),
            samples: self.samples(),
            seed: self.seed(),
            lazy,
            trace,
        }
    }
}

fn clamp_budget(k: usize, n: usize, warnings: &mut Vec<String>) -> usize {
    if k > n {
        warnings.push(format!("budget {k} clamped to node count {n}"));
        n
    } else {
        k
    }
}

#[cfg(feature = "parallel")]
fn evaluate_candidates(
    g: &Graph,
    oracle: &GainOracle,
    selected: &NodeSet,
    candidates: &[u32],
) -> Vec<f64> {
    candidates
        .par_iter()
        .map(|&u| oracle.gain(g, selected, u))
        .collect()
}

#[cfg(not(feature = "parallel"))]
fn evaluate_candidates(
    g: &Graph,
    oracle: &GainOracle,
    selected: &NodeSet,
    candidates: &[u32],
) -> Vec<f64> {
    candidates
        .iter()
        .map(|&u| oracle.gain(g, selected, u))
        .collect()
}

/// Picks the strictly larger gain; on exact ties the lower node wins.
fn argmax(candidates: &[u32], gains: &[f64]) -> (u32, f64) {
    let mut best = (candidates[0], gains[0]);
    for (&u, &gain) in candidates.iter().zip(gains).skip(1) {
        if gain > best.1 {
            best = (u, gain);
        }
    }
    best
}

/// Plain greedy: `k` rounds, each evaluating every remaining candidate and
/// taking the argmax (ties to the lowest node ID).
pub fn greedy_select(
    g: &Graph,
    k: usize,
    oracle: &mut GainOracle,
    trace: bool,
) -> Result<SelectionResult> {
    let t0 = Instant::now();
    let n = g.n();
    let mut warnings = Vec::new();
    let budget = clamp_budget(k, n, &mut warnings);
    let mut selected_set = NodeSet::new(n);
    let mut selected = Vec::with_capacity(budget);
    let mut gains = Vec::with_capacity(budget);
    let mut objective_trace = trace.then(Vec::new);
    let mut oracle_calls = 0u64;

    for round in 0..budget as u32 {
        oracle.begin_round(g, &selected_set, round);
        let candidates: Vec<u32> = (0..n as u32).filter(|&u| !selected_set.contains(u)).collect();
        let round_gains = evaluate_candidates(g, oracle, &selected_set, &candidates);
        oracle_calls += candidates.len() as u64;
        let (winner, gain) = argmax(&candidates, &round_gains);
        selected.push(winner);
        gains.push(gain);
        selected_set.insert(winner);
        oracle.commit(winner)?;
        if let Some(tr) = objective_trace.as_mut() {
            tr.push(oracle.objective(g, &selected_set, round));
        }
    }

    let select_ms = t0.elapsed().as_millis() as u64;
    Ok(SelectionResult {
        config: oracle.config(k as u32, false, trace),
        selected,
        gains,
        objective_trace,
        oracle_calls,
        elapsed: PhaseTimings {
            index_ms: oracle.index_ms(),
            select_ms,
        },
        warnings,
    })
}

struct QueueEntry {
    gain: f64,
    node: u32,
    round: u32,
}

impl PartialEq for QueueEntry {
    fn eq(&self, other: &Self) -> bool {
        self.gain == other.gain && self.node == other.node
    }
}

impl Eq for QueueEntry {}

impl PartialOrd for QueueEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QueueEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Max-heap on gain; among equal gains the lower node surfaces
        // first, matching the plain driver's tie-break.
        self.gain
            .total_cmp(&other.gain)
            .then_with(|| other.node.cmp(&self.node))
    }
}

/// Lazy greedy: keeps stale gain bounds in a priority queue and
/// re-evaluates a candidate only when its bound tops the queue. For
/// deterministic submodular oracles this selects exactly the same nodes as
/// [`greedy_select`], usually with far fewer oracle calls.
pub fn lazy_greedy_select(
    g: &Graph,
    k: usize,
    oracle: &mut GainOracle,
    trace: bool,
) -> Result<SelectionResult> {
    let t0 = Instant::now();
    let n = g.n();
    let mut warnings = Vec::new();
    let budget = clamp_budget(k, n, &mut warnings);
    let mut selected_set = NodeSet::new(n);
    let mut selected = Vec::with_capacity(budget);
    let mut gains = Vec::with_capacity(budget);
    let mut objective_trace = trace.then(Vec::new);
    let mut oracle_calls = 0u64;

    let mut heap = BinaryHeap::with_capacity(n);
    let mut round = 0u32;
    if budget > 0 {
        oracle.begin_round(g, &selected_set, round);
        for u in 0..n as u32 {
            let gain = oracle.gain(g, &selected_set, u);
            oracle_calls += 1;
            heap.push(QueueEntry { gain, node: u, round });
        }
    }

    while selected.len() < budget {
        let top = heap.pop().expect("queue holds every unselected node");
        if top.round == round {
            selected.push(top.node);
            gains.push(top.gain);
            selected_set.insert(top.node);
            oracle.commit(top.node)?;
            if let Some(tr) = objective_trace.as_mut() {
                tr.push(oracle.objective(g, &selected_set, round));
            }
            round += 1;
            if selected.len() < budget {
                oracle.begin_round(g, &selected_set, round);
            }
        } else {
            let gain = oracle.gain(g, &selected_set, top.node);
            oracle_calls += 1;
            heap.push(QueueEntry {
                gain,
                node: top.node,
                round,
            });
        }
    }

    let select_ms = t0.elapsed().as_millis() as u64;
    Ok(SelectionResult {
        config: oracle.config(k as u32, true, trace),
        selected,
        gains,
        objective_trace,
        oracle_calls,
        elapsed: PhaseTimings {
            index_ms: oracle.index_ms(),
            select_ms,
        },
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{brute_force_optimal, objective, objective_f1};
    use crate::testutil;

    #[test]
    fn zero_budget_selects_nothing() {
        let g = testutil::star(4);
        let mut oracle = GainOracle::exact_f1(3);
        let res = greedy_select(&g, 0, &mut oracle, false).unwrap();
        assert!(res.selected.is_empty());
        assert_eq!(res.oracle_calls, 0);
    }

    #[test]
    fn star_center_wins_round_one() {
        let g = testutil::star(4);
        let mut oracle = GainOracle::exact_f2(2);
        let res = greedy_select(&g, 1, &mut oracle, false).unwrap();
        assert_eq!(res.selected, vec![0]);
        let (opt, _) = brute_force_optimal(&g, 1, 2, ProblemKind::HitProbability).unwrap();
        assert_eq!(res.selected, opt);
    }

    #[test]
    fn full_budget_reaches_the_maximum() {
        let g = testutil::cycle(6);
        let mut oracle = GainOracle::exact_f1(4);
        let res = greedy_select(&g, 6, &mut oracle, false).unwrap();
        assert_eq!(res.selected.len(), 6);
        let all = NodeSet::from_ids(6, res.selected.iter().copied());
        assert_eq!(objective_f1(&g, &all, 4), 24.0);
    }

    #[test]
    fn budget_above_n_is_clamped_with_a_warning() {
        let g = testutil::path(3);
        let mut oracle = GainOracle::exact_f1(2);
        let res = greedy_select(&g, 10, &mut oracle, false).unwrap();
        assert_eq!(res.selected.len(), 3);
        assert_eq!(res.warnings.len(), 1);
    }

    #[test]
    fn exact_gains_never_increase() {
        for seed in 0..6u64 {
            let g = testutil::random_connected_graph(seed, 12);
            for kind in [ProblemKind::HittingTime, ProblemKind::HitProbability] {
                let mut oracle = match kind {
                    ProblemKind::HittingTime => GainOracle::exact_f1(3),
                    ProblemKind::HitProbability => GainOracle::exact_f2(3),
                };
                let res = greedy_select(&g, g.n().min(4), &mut oracle, false).unwrap();
                for pair in res.gains.windows(2) {
                    assert!(pair[1] <= pair[0] + 1e-9, "gains increased: {:?}", res.gains);
                }
            }
        }
    }

    #[test]
    fn winner_strictly_improves_the_objective() {
        for seed in 0..6u64 {
            let g = testutil::random_connected_graph(seed, 10);
            let mut oracle = GainOracle::exact_f2(3);
            let res = greedy_select(&g, g.n().min(3), &mut oracle, true).unwrap();
            let trace = res.objective_trace.unwrap();
            let mut prev = 0.0;
            let max = g.n() as f64;
            for &value in &trace {
                assert!(value > prev - 1e-12 && (value > prev + 1e-12 || prev >= max - 1e-12));
                prev = value;
            }
        }
    }

    #[test]
    fn exact_selection_is_deterministic() {
        let g = testutil::random_connected_graph(9, 20);
        let run = |lazy: bool| {
            let mut oracle = GainOracle::exact_f1(3);
            if lazy {
                lazy_greedy_select(&g, 4, &mut oracle, false).unwrap().selected
            } else {
                greedy_select(&g, 4, &mut oracle, false).unwrap().selected
            }
        };
        assert_eq!(run(false), run(false));
        assert_eq!(run(true), run(true));
    }

    #[test]
    fn lazy_matches_plain_for_exact_oracles() {
        for seed in 0..10u64 {
            let g = testutil::random_connected_graph(seed, 25);
            let k = g.n().min(5);
            for f2 in [false, true] {
                let mk = |_| -> GainOracle {
                    if f2 {
                        GainOracle::exact_f2(3)
                    } else {
                        GainOracle::exact_f1(3)
                    }
                };
                let plain = greedy_select(&g, k, &mut mk(()), false).unwrap();
                let lazy = lazy_greedy_select(&g, k, &mut mk(()), false).unwrap();
                assert_eq!(plain.selected, lazy.selected, "seed {seed} f2 {f2}");
                assert_eq!(plain.gains, lazy.gains);
            }
        }
    }

    #[test]
    fn lazy_round_one_costs_exactly_n_calls() {
        let g = testutil::random_connected_graph(3, 15);
        let mut oracle = GainOracle::exact_f1(3);
        let res = lazy_greedy_select(&g, 1, &mut oracle, false).unwrap();
        assert_eq!(res.oracle_calls, g.n() as u64);
    }

    #[test]
    fn lazy_saves_oracle_calls_on_a_power_law_graph() {
        let g = crate::graph::generate_power_law(100, 3, 21).unwrap();
        let k = 10;
        let mut plain_oracle = GainOracle::exact_f1(4);
        let plain = greedy_select(&g, k, &mut plain_oracle, false).unwrap();
        let mut lazy_oracle = GainOracle::exact_f1(4);
        let lazy = lazy_greedy_select(&g, k, &mut lazy_oracle, false).unwrap();
        assert_eq!(plain.selected, lazy.selected);
        assert!(
            lazy.oracle_calls < plain.oracle_calls,
            "lazy {} vs plain {}",
            lazy.oracle_calls,
            plain.oracle_calls
        );
        assert!(lazy.oracle_calls < (g.n() * k) as u64);
    }

    #[test]
    fn greedy_meets_the_constant_factor_bound() {
        let bound = 1.0 - 1.0 / std::f64::consts::E;
        for seed in 0..8u64 {
            let g = testutil::random_connected_graph(seed, 9);
            let k = 2.min(g.n());
            for kind in [ProblemKind::HittingTime, ProblemKind::HitProbability] {
                let mut oracle = match kind {
                    ProblemKind::HittingTime => GainOracle::exact_f1(3),
                    ProblemKind::HitProbability => GainOracle::exact_f2(3),
                };
                let res = greedy_select(&g, k, &mut oracle, false).unwrap();
                let sel = NodeSet::from_ids(g.n(), res.selected.iter().copied());
                let achieved = objective(&g, &sel, 3, kind);
                let (_, opt) = brute_force_optimal(&g, k, 3, kind).unwrap();
                assert!(
                    achieved >= bound * opt - 1e-9,
                    "seed {seed}: {achieved} < {bound} * {opt}"
                );
            }
        }
    }

    #[test]
    fn sampled_oracle_selects_like_exact_on_an_easy_instance() {
        let g = testutil::star(6);
        let mut oracle = GainOracle::sampled_f2(2, 50, 13);
        let res = greedy_select(&g, 1, &mut oracle, false).unwrap();
        assert_eq!(res.selected, vec![0]);
        assert_eq!(res.config.algorithm, "samplef2");
    }

    #[test]
    fn sampled_oracle_is_deterministic_per_seed() {
        let g = crate::graph::generate_power_law(60, 3, 8).unwrap();
        let run = || {
            let mut oracle = GainOracle::sampled_f1(4, 30, 5);
            greedy_select(&g, 3, &mut oracle, false).unwrap()
        };
        let a = run();
        let b = run();
        assert_eq!(a.selected, b.selected);
        assert_eq!(a.gains, b.gains);
    }
}
