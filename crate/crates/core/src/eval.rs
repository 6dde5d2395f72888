//! Evaluation metrics (average hitting time, expected hit-node count) and
//! the experiment sweep that scores selection algorithms with them.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

use crate::approx;
use crate::baselines;
use crate::error::{Error, Result};
use crate::exact::{self, ProblemKind};
use crate::graph::Graph;
use crate::greedy::{self, GainOracle, SelectionResult};
use crate::rng::mix2;
use crate::sampling;
use crate::set::NodeSet;

const EVAL_SALT: u64 = 0x6576_616c_5f73;

/// Average sampled hitting time from the non-target nodes into `targets`.
/// Undefined for an empty or full target set.
pub fn metric_aht(g: &Graph, targets: &NodeSet, walk_len: u32, r_eval: u32, seed: u64) -> Result<f64> {
    if targets.is_empty() {
        return Err(Error::UndefinedMetric(
            "average hitting time needs a nonempty target set".into(),
        ));
    }
    if targets.len() == g.n() {
        return Err(Error::UndefinedMetric(
            "average hitting time needs at least one non-target node".into(),
        ));
    }
    let est = sampling::estimate_objectives(g, targets, walk_len, r_eval, seed);
    let others = (g.n() - targets.len()) as f64;
    // Recover the summed hitting-time estimate from the f1 value.
    let time_sum = g.n() as f64 * walk_len as f64 - est.f1_hat;
    Ok(time_sum / others)
}

/// Expected number of nodes whose walk reaches `targets` (members count),
/// estimated by sampling.
pub fn metric_ehn(g: &Graph, targets: &NodeSet, walk_len: u32, r_eval: u32, seed: u64) -> Result<f64> {
    if targets.is_empty() {
        return Err(Error::UndefinedMetric(
            "expected hit-node count needs a nonempty target set".into(),
        ));
    }
    Ok(sampling::estimate_objectives(g, targets, walk_len, r_eval, seed).f2_hat)
}

/// Noise-free counterpart of [`metric_aht`] computed by the exact DP.
pub fn metric_aht_exact(g: &Graph, targets: &NodeSet, walk_len: u32) -> Result<f64> {
    if targets.is_empty() || targets.len() == g.n() {
        return Err(Error::UndefinedMetric(
            "average hitting time needs a nonempty, proper target set".into(),
        ));
    }
    let values = exact::hit_profile(g, targets, walk_len, ProblemKind::HittingTime).values;
    let sum: f64 = values
        .iter()
        .enumerate()
        .filter(|&(u, _)| !targets.contains(u as u32))
        .map(|(_, &h)| h)
        .sum();
    Ok(sum / (g.n() - targets.len()) as f64)
}

/// Noise-free counterpart of [`metric_ehn`].
pub fn metric_ehn_exact(g: &Graph, targets: &NodeSet, walk_len: u32) -> Result<f64> {
    if targets.is_empty() {
        return Err(Error::UndefinedMetric(
            "expected hit-node count needs a nonempty target set".into(),
        ));
    }
    Ok(exact::objective_f2(g, targets, walk_len))
}

/// Selection algorithms the sweep and CLI know by label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Algorithm {
    DpF1,
    DpF2,
    SampleF1,
    SampleF2,
    ApproxF1,
    ApproxF2,
    Degree,
    Dominate,
}

impl Algorithm {
    pub const ALL: [Algorithm; 8] = [
        Algorithm::DpF1,
        Algorithm::DpF2,
        Algorithm::SampleF1,
        Algorithm::SampleF2,
        Algorithm::ApproxF1,
        Algorithm::ApproxF2,
        Algorithm::Degree,
        Algorithm::Dominate,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Algorithm::DpF1 => "dpf1",
            Algorithm::DpF2 => "dpf2",
            Algorithm::SampleF1 => "samplef1",
            Algorithm::SampleF2 => "samplef2",
            Algorithm::ApproxF1 => "approxf1",
            Algorithm::ApproxF2 => "approxf2",
            Algorithm::Degree => "degree",
            Algorithm::Dominate => "dominate",
        }
    }

    fn is_exact_dp(&self) -> bool {
        matches!(self, Algorithm::DpF1 | Algorithm::DpF2)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .iter()
            .find(|a| a.label() == s)
            .copied()
            .ok_or_else(|| Error::UnknownAlgorithm(s.to_string()))
    }
}

/// Knobs shared by the sweep and the CLI's select command.
#[derive(Debug, Clone, Copy, Default)]
pub struct SelectOptions {
    pub lazy: bool,
    pub trace: bool,
    /// Overrides the exact-DP size guard.
    pub force: bool,
    /// Closed-neighborhood variant of the dominate baseline.
    pub dominate_closed: bool,
}

/// Estimated DP-greedy operation count above which exact algorithms are
/// refused without `force`.
pub const EXACT_GUARD_LIMIT: f64 = 1e12;

fn check_exact_guard(g: &Graph, k: usize, walk_len: u32, force: bool) -> Result<()> {
    let estimate = g.n() as f64 * g.m() as f64 * walk_len as f64 * k as f64;
    if estimate > EXACT_GUARD_LIMIT && !force {
        return Err(Error::SizeGuard {
            estimate,
            limit: EXACT_GUARD_LIMIT,
        });
    }
    Ok(())
}

/// Runs one selection algorithm. `r_select` feeds the sampled and indexed
/// algorithms; the baselines ignore it.
pub fn select_with(
    g: &Graph,
    algorithm: Algorithm,
    k: usize,
    walk_len: u32,
    r_select: u32,
    seed: u64,
    opts: SelectOptions,
) -> Result<SelectionResult> {
    let run_oracle = |mut oracle: GainOracle| -> Result<SelectionResult> {
        if opts.lazy {
            greedy::lazy_greedy_select(g, k, &mut oracle, opts.trace)
        } else {
            greedy::greedy_select(g, k, &mut oracle, opts.trace)
        }
    };
    match algorithm {
        Algorithm::DpF1 => {
            check_exact_guard(g, k, walk_len, opts.force)?;
            run_oracle(GainOracle::exact_f1(walk_len))
        }
        Algorithm::DpF2 => {
            check_exact_guard(g, k, walk_len, opts.force)?;
            run_oracle(GainOracle::exact_f2(walk_len))
        }
        Algorithm::SampleF1 => run_oracle(GainOracle::sampled_f1(walk_len, r_select, seed)),
        Algorithm::SampleF2 => run_oracle(GainOracle::sampled_f2(walk_len, r_select, seed)),
        Algorithm::ApproxF1 => {
            if opts.lazy {
                run_oracle(GainOracle::indexed(
                    g,
                    walk_len,
                    r_select,
                    seed,
                    ProblemKind::HittingTime,
                )?)
            } else {
                approx::approx_greedy(
                    g,
                    k,
                    walk_len,
                    r_select,
                    ProblemKind::HittingTime,
                    seed,
                    opts.trace,
                )
            }
        }
        Algorithm::ApproxF2 => {
            if opts.lazy {
                run_oracle(GainOracle::indexed(
                    g,
                    walk_len,
                    r_select,
                    seed,
                    ProblemKind::HitProbability,
                )?)
            } else {
                approx::approx_greedy(
                    g,
                    k,
                    walk_len,
                    r_select,
                    ProblemKind::HitProbability,
                    seed,
                    opts.trace,
                )
            }
        }
        Algorithm::Degree => Ok(baselines::degree_select(g, k)),
        Algorithm::Dominate => Ok(baselines::dominate_select(g, k, opts.dominate_closed)),
    }
}

/// One scored sweep cell.
#[derive(Debug, Clone, Serialize)]
pub struct MetricReport {
    pub algorithm: String,
    pub k: u32,
    pub l: u32,
    pub r_select: u32,
    pub r_eval: u32,
    pub seed: u64,
    pub aht: f64,
    pub ehn: f64,
    pub select_ms: u64,
    pub eval_ms: u64,
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub algorithms: Vec<Algorithm>,
    pub k_values: Vec<u32>,
    pub walk_len: u32,
    pub r_select: u32,
    pub r_eval: u32,
    pub seed: u64,
    /// Score with the exact DP instead of sampling (small graphs only).
    pub exact_metrics: bool,
    pub options: SelectOptions,
}

/// Runs every (algorithm, k) cell: selection followed by both metrics
/// under a fresh evaluation seed derived independently of the selection
/// seed. Rows come back sorted by (algorithm label, k).
pub fn run_sweep(g: &Graph, config: &SweepConfig) -> Result<Vec<MetricReport>> {
    for algo in &config.algorithms {
        if algo.is_exact_dp() {
            let max_k = config.k_values.iter().copied().max().unwrap_or(0);
            check_exact_guard(g, max_k as usize, config.walk_len, config.options.force)?;
        }
    }
    let mut rows = Vec::new();
    for (cell, (&algo, &k)) in config
        .algorithms
        .iter()
        .flat_map(|a| config.k_values.iter().map(move |k| (a, k)))
        .enumerate()
    {
        let t0 = Instant::now();
        let selection = select_with(
            g,
            algo,
            k as usize,
            config.walk_len,
            config.r_select,
            config.seed,
            config.options,
        )?;
        let select_ms = t0.elapsed().as_millis() as u64;
        let targets = NodeSet::from_ids(g.n(), selection.selected.iter().copied());

        let eval_seed = mix2(config.seed, EVAL_SALT ^ cell as u64);
        let t1 = Instant::now();
        let (aht, ehn) = if config.exact_metrics {
            (
                metric_aht_exact(g, &targets, config.walk_len)?,
                metric_ehn_exact(g, &targets, config.walk_len)?,
            )
        } else {
            (
                metric_aht(g, &targets, config.walk_len, config.r_eval, eval_seed)?,
                metric_ehn(g, &targets, config.walk_len, config.r_eval, eval_seed)?,
            )
        };
        let eval_ms = t1.elapsed().as_millis() as u64;
        rows.push(MetricReport {
            algorithm: algo.label().to_string(),
            k,
            l: config.walk_len,
            r_select: config.r_select,
            r_eval: config.r_eval,
            seed: config.seed,
            aht,
            ehn,
            select_ms,
            eval_ms,
        });
    }
    rows.sort_by(|a, b| a.algorithm.cmp(&b.algorithm).then(a.k.cmp(&b.k)));
    Ok(rows)
}

/// Flat CSV with the fixed header
/// `algorithm,k,L,R_select,R_eval,seed,aht,ehn,select_ms,eval_ms`.
pub fn reports_to_csv(rows: &[MetricReport]) -> String {
    let mut out = String::from("algorithm,k,L,R_select,R_eval,seed,aht,ehn,select_ms,eval_ms\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.algorithm,
            r.k,
            r.l,
            r.r_select,
            r.r_eval,
            r.seed,
            r.aht,
            r.ehn,
            r.select_ms,
            r.eval_ms
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil;

    #[test]
    fn surrounded_holdout_has_unit_hitting_time() {
        // All of node 0's neighbors are targets.
        let g = testutil::star(4);
        let targets = NodeSet::from_ids(5, 1..5); // every leaf
        // Node 0 (the center) remains; its single step lands in the set.
        let aht = metric_aht(&g, &targets, 3, 50, 7).unwrap();
        assert_eq!(aht, 1.0);
    }

    #[test]
    fn path_metric_approaches_the_exact_average() {
        let g = testutil::path(3);
        let targets = NodeSet::from_ids(3, [2]);
        // (2.5 + 2.0) / 2, both values confirmed by the enumeration oracle.
        let aht = metric_aht(&g, &targets, 3, 100_000, 3).unwrap();
        assert!((aht - 2.25).abs() < 0.02, "aht {aht}");
        let exact = metric_aht_exact(&g, &targets, 3).unwrap();
        assert!((exact - 2.25).abs() < 1e-12);
    }

    #[test]
    fn unreachable_targets_average_the_horizon() {
        let g = crate::graph::Graph::from_edges(
            4,
            &[(0, 1), (2, 3)],
            crate::graph::IsolatedPolicy::Reject,
        )
        .unwrap();
        let targets = NodeSet::from_ids(4, [2, 3]);
        let aht = metric_aht(&g, &targets, 5, 40, 11).unwrap();
        assert_eq!(aht, 5.0);
    }

    #[test]
    fn ehn_on_the_star_is_exact() {
        let g = testutil::star(4);
        let center = NodeSet::from_ids(5, [0]);
        assert_eq!(metric_ehn(&g, &center, 1, 200, 5).unwrap(), 5.0);
        assert_eq!(metric_ehn_exact(&g, &center, 1).unwrap(), 5.0);
    }

    #[test]
    fn ehn_counts_members_and_nothing_else_at_the_full_set() {
        let g = testutil::path(4);
        let all = NodeSet::from_ids(4, 0..4);
        assert_eq!(metric_ehn(&g, &all, 3, 10, 1).unwrap(), 4.0);
    }

    #[test]
    fn path_ehn_estimate_matches_the_exact_value() {
        let g = testutil::path(3);
        let targets = NodeSet::from_ids(3, [2]);
        let ehn = metric_ehn(&g, &targets, 1, 100_000, 17).unwrap();
        assert!((ehn - 1.5).abs() < 0.02, "ehn {ehn}");
    }

    #[test]
    fn metrics_reject_degenerate_sets() {
        let g = testutil::path(3);
        assert!(metric_aht(&g, &NodeSet::new(3), 2, 10, 1).is_err());
        assert!(metric_aht(&g, &NodeSet::from_ids(3, 0..3), 2, 10, 1).is_err());
        assert!(metric_ehn(&g, &NodeSet::new(3), 2, 10, 1).is_err());
    }

    #[test]
    fn ehn_always_covers_the_members() {
        for seed in 0..5u64 {
            let g = testutil::random_connected_graph(seed, 12);
            let targets = NodeSet::from_ids(g.n(), [0, 1]);
            let ehn = metric_ehn(&g, &targets, 3, 30, seed).unwrap();
            assert!(ehn >= targets.len() as f64);
        }
    }

    #[test]
    fn aht_shrinks_along_a_greedy_prefix() {
        let g = crate::graph::generate_power_law(120, 3, 5).unwrap();
        let selection = select_with(
            &g,
            Algorithm::ApproxF1,
            8,
            4,
            50,
            9,
            SelectOptions::default(),
        )
        .unwrap();
        let mut prefix = NodeSet::new(g.n());
        let mut last = f64::INFINITY;
        for &u in &selection.selected {
            prefix.insert(u);
            let aht = metric_aht_exact(&g, &prefix, 4).unwrap();
            assert!(aht <= last + 1e-9);
            last = aht;
        }
    }

    #[test]
    fn metric_rows_are_deterministic() {
        let g = crate::graph::generate_power_law(100, 3, 2).unwrap();
        let config = SweepConfig {
            algorithms: vec![Algorithm::Degree, Algorithm::ApproxF1],
            k_values: vec![2, 5],
            walk_len: 4,
            r_select: 20,
            r_eval: 30,
            seed: 77,
            exact_metrics: false,
            options: SelectOptions::default(),
        };
        let a = run_sweep(&g, &config).unwrap();
        let b = run_sweep(&g, &config).unwrap();
        assert_eq!(a.len(), 4);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.aht, y.aht);
            assert_eq!(x.ehn, y.ehn);
        }
        // Sorted by (algorithm, k).
        assert_eq!(a[0].algorithm, "approxf1");
        assert_eq!(a[0].k, 2);
        assert_eq!(a[3].algorithm, "degree");
    }

    #[test]
    fn single_cell_sweep_emits_one_row() {
        let g = testutil::star(6);
        let config = SweepConfig {
            algorithms: vec![Algorithm::Degree],
            k_values: vec![1],
            walk_len: 2,
            r_select: 10,
            r_eval: 10,
            seed: 1,
            exact_metrics: true,
            options: SelectOptions::default(),
        };
        let rows = run_sweep(&g, &config).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].algorithm, "degree");
        let csv = reports_to_csv(&rows);
        assert!(csv.starts_with("algorithm,k,L,R_select,R_eval,seed,aht,ehn,select_ms,eval_ms\n"));
        assert_eq!(csv.lines().count(), 2);
    }

    #[test]
    fn sweep_refuses_oversized_exact_runs() {
        let g = crate::graph::generate_power_law(200, 4, 1).unwrap();
        let config = SweepConfig {
            algorithms: vec![Algorithm::DpF1],
            k_values: vec![50],
            walk_len: 1_000_000,
            r_select: 1,
            r_eval: 1,
            seed: 1,
            exact_metrics: true,
            options: SelectOptions::default(),
        };
        let err = run_sweep(&g, &config).unwrap_err();
        assert!(matches!(err, Error::SizeGuard { .. }));
    }

    #[test]
    fn algorithm_labels_round_trip() {
        for algo in Algorithm::ALL {
            assert_eq!(algo.label().parse::<Algorithm>().unwrap(), algo);
        }
        assert!("nope".parse::<Algorithm>().is_err());
    }
}
