//! Comparison selectors: top-degree and greedy neighbor-coverage.

use std::time::Instant;

use crate::graph::Graph;
use crate::greedy::{PhaseTimings, SelectConfig, SelectionResult};
use crate::set::NodeSet;

fn baseline_result(
    label: &str,
    k: usize,
    selected: Vec<u32>,
    gains: Vec<f64>,
    select_ms: u64,
    warnings: Vec<String>,
) -> SelectionResult {
    SelectionResult {
        config: SelectConfig {
            algorithm: label.to_string(),
            k: k as u32,
            walk_len: 0,
            samples: None,
            seed: None,
            lazy: false,
            trace: false,
        },
        selected,
        gains,
        objective_trace: None,
        oracle_calls: 0,
        elapsed: PhaseTimings {
            index_ms: 0,
            select_ms,
        },
        warnings,
    }
}

/// Top-k nodes by degree, ties to the lower node ID. The per-round "gain"
/// recorded is the chosen node's degree.
pub fn degree_select(g: &Graph, k: usize) -> SelectionResult {
    let t0 = Instant::now();
    let n = g.n();
    let mut warnings = Vec::new();
    let budget = if k > n {
        warnings.push(format!("budget {k} clamped to node count {n}"));
        n
    } else {
        k
    };
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.sort_by_key(|&u| (std::cmp::Reverse(g.degree(u)), u));
    let selected: Vec<u32> = order.into_iter().take(budget).collect();
    let gains = selected.iter().map(|&u| g.degree(u) as f64).collect();
    baseline_result(
        "degree",
        k,
        selected,
        gains,
        t0.elapsed().as_millis() as u64,
        warnings,
    )
}

/// Greedy neighbor-coverage selection: each round adds the node whose
/// neighborhood covers the most not-yet-covered nodes. By default only
/// neighborhoods count as covered (a selected node does not cover itself);
/// `closed` switches to closed-neighborhood coverage. Recorded gains are
/// the per-round new-coverage counts.
pub fn dominate_select(g: &Graph, k: usize, closed: bool) -> SelectionResult {
    let t0 = Instant::now();
    let n = g.n();
    let mut warnings = Vec::new();
    let budget = if k > n {
        warnings.push(format!("budget {k} clamped to node count {n}"));
        n
    } else {
        k
    };
    let mut covered = NodeSet::new(n);
    let mut in_set = NodeSet::new(n);
    let mut selected = Vec::with_capacity(budget);
    let mut gains = Vec::with_capacity(budget);

    for _ in 0..budget {
        let mut best: Option<(u32, usize)> = None;
        for u in 0..n as u32 {
            if in_set.contains(u) {
                continue;
            }
            let mut fresh = g
                .neighbors(u)
                .iter()
                .filter(|&&v| !covered.contains(v))
                .count();
            if closed && !covered.contains(u) {
                fresh += 1;
            }
            if best.is_none_or(|(_, b)| fresh > b) {
                best = Some((u, fresh));
            }
        }
        let (winner, fresh) = best.expect("budget <= n leaves a candidate");
        selected.push(winner);
        gains.push(fresh as f64);
        in_set.insert(winner);
        for &v in g.neighbors(winner) {
            covered.insert(v);
        }
        if closed {
            covered.insert(winner);
        }
    }

    baseline_result(
        "dominate",
        k,
        selected,
        gains,
        t0.elapsed().as_millis() as u64,
        warnings,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Graph, IsolatedPolicy, ParseOptions};
    use crate::testutil;

    #[test]
    fn degree_picks_the_star_center() {
        let g = testutil::star(4);
        assert_eq!(degree_select(&g, 1).selected, vec![0]);
    }

    #[test]
    fn degree_ties_break_by_node_id() {
        let g = testutil::cycle(5);
        assert_eq!(degree_select(&g, 2).selected, vec![0, 1]);
    }

    #[test]
    fn degree_full_budget_returns_everyone() {
        let g = testutil::path(4);
        assert_eq!(degree_select(&g, 4).selected.len(), 4);
        let clamped = degree_select(&g, 9);
        assert_eq!(clamped.selected.len(), 4);
        assert_eq!(clamped.warnings.len(), 1);
    }

    #[test]
    fn degree_ignores_edge_list_order() {
        let a = Graph::parse_edge_list("0 1\n0 2\n3 0\n1 2\n", ParseOptions::default()).unwrap();
        let b = Graph::parse_edge_list("1 2\n3 0\n0 2\n0 1\n", ParseOptions::default()).unwrap();
        assert_eq!(degree_select(&a, 2).selected, degree_select(&b, 2).selected);
    }

    #[test]
    fn dominate_picks_the_star_center() {
        let g = testutil::star(4);
        let res = dominate_select(&g, 1, false);
        assert_eq!(res.selected, vec![0]);
        assert_eq!(res.gains, vec![4.0]);
    }

    #[test]
    fn dominate_covers_both_disjoint_stars() {
        // Stars centered at 0 (leaves 1..=3) and 4 (leaves 5..=7), linked
        // leaf-to-leaf so the graph has no isolated parts.
        let edges = [(0, 1), (0, 2), (0, 3), (4, 5), (4, 6), (4, 7), (3, 5)];
        let g = Graph::from_edges(8, &edges, IsolatedPolicy::Reject).unwrap();
        let res = dominate_select(&g, 2, false);
        assert_eq!(res.selected, vec![0, 4]);
        assert_eq!(res.gains, vec![3.0, 3.0]);
    }

    #[test]
    fn dominate_zero_budget_is_empty() {
        let g = testutil::star(3);
        assert!(dominate_select(&g, 0, false).selected.is_empty());
    }

    #[test]
    fn dominate_coverage_gains_never_increase() {
        for seed in 0..6u64 {
            let g = testutil::random_connected_graph(seed, 20);
            for closed in [false, true] {
                let res = dominate_select(&g, g.n().min(6), closed);
                for pair in res.gains.windows(2) {
                    assert!(pair[1] <= pair[0]);
                }
            }
        }
    }

    #[test]
    fn closed_variant_counts_the_node_itself() {
        let g = testutil::path(2);
        let open = dominate_select(&g, 1, false);
        let closed = dominate_select(&g, 1, true);
        assert_eq!(open.gains, vec![1.0]);
        assert_eq!(closed.gains, vec![2.0]);
    }

    #[test]
    fn selectors_are_deterministic() {
        let g = testutil::random_connected_graph(12, 30);
        assert_eq!(degree_select(&g, 5).selected, degree_select(&g, 5).selected);
        assert_eq!(
            dominate_select(&g, 5, false).selected,
            dominate_select(&g, 5, false).selected
        );
    }
}
