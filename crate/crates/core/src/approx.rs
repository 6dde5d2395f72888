//! Sample-materialized approximate greedy selection.
//!
//! One batch of walks (`replicates` per node) is materialized into
//! per-replicate inverted lists: the list for node `v` in replicate `i`
//! holds every source whose replicate-`i` walk first reaches `v`, with the
//! hop at which it arrived. Marginal gains for any candidate set then come
//! from list scans against a running per-(replicate, node) first-hit state,
//! so the whole k-round selection costs one index scan per round instead of
//! fresh walks per candidate.
//!
//! Entries are packed as `source << 8 | weight` in a `u32`; gains are exact
//! integer totals divided by the replicate count, so selections are
//! bit-identical across thread counts and evaluation orders.

use std::ops::Range;
use std::time::Instant;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exact::ProblemKind;
use crate::graph::Graph;
use crate::greedy::{PhaseTimings, SelectConfig, SelectionResult};
use crate::rng::WalkRng;
use crate::sampling::Walk;
use crate::set::NodeSet;

/// Node-count ceiling imposed by the packed entry layout (24 source bits).
pub const MAX_INDEXED_NODES: usize = 1 << 24;
/// Horizon ceiling imposed by the packed entry layout (8 weight bits).
pub const MAX_INDEXED_WALK_LEN: u32 = 255;

/// One inverted-list element: `source`'s walk first reached the list's node
/// at hop `weight` (always 1 for the hit-probability variant).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexEntry {
    pub source: u32,
    pub weight: u8,
}

#[inline]
fn pack(source: u32, weight: u8) -> u32 {
    (source << 8) | weight as u32
}

#[inline]
fn unpack(packed: u32) -> IndexEntry {
    IndexEntry {
        source: packed >> 8,
        weight: (packed & 0xff) as u8,
    }
}

/// Inverted lists for one replicate, CSR over target nodes.
#[derive(Debug)]
struct ReplicateLists {
    offsets: Vec<u32>,
    entries: Vec<u32>,
}

impl ReplicateLists {
    #[inline]
    fn list(&self, node: u32) -> &[u32] {
        let lo = self.offsets[node as usize] as usize;
        let hi = self.offsets[node as usize + 1] as usize;
        &self.entries[lo..hi]
    }
}

/// Materialized walk samples: `replicates` inverted lists over all nodes.
#[derive(Debug)]
pub struct WalkSampleIndex {
    n: usize,
    replicates: u32,
    walk_len: u32,
    kind: ProblemKind,
    seed: Option<u64>,
    lists: Vec<ReplicateLists>,
    entry_total: u64,
}

fn validate_index_params(n: usize, walk_len: u32, replicates: u32) -> Result<()> {
    if n > MAX_INDEXED_NODES {
        return Err(Error::InvalidParameter(format!(
            "{n} nodes exceed the sample-index capacity of {MAX_INDEXED_NODES}"
        )));
    }
    if walk_len < 1 || walk_len > MAX_INDEXED_WALK_LEN {
        return Err(Error::InvalidParameter(format!(
            "walk length must be in 1..={MAX_INDEXED_WALK_LEN}, got {walk_len}"
        )));
    }
    if replicates < 1 {
        return Err(Error::InvalidParameter(
            "need at least one replicate".into(),
        ));
    }
    Ok(())
}

/// Builds one replicate's lists from walks supplied in source order.
/// `emit` is called once per source and pushes that walk's steps.
fn build_replicate<F>(n: usize, kind: ProblemKind, mut walk_of: F) -> ReplicateLists
where
    F: FnMut(u32, &mut Vec<u32>),
{
    // (target, packed) pairs in source order; a counting sort by target
    // then keeps each list sorted by source.
    let mut pairs: Vec<(u32, u32)> = Vec::new();
    let mut steps: Vec<u32> = Vec::new();
    // First-visit dedup via epoch stamps: stamp[v] == current source means
    // already visited in this walk. Sources strictly increase, so no reset.
    let mut stamp = vec![u32::MAX; n];
    for source in 0..n as u32 {
        stamp[source as usize] = source;
        steps.clear();
        walk_of(source, &mut steps);
        for (hop, &v) in steps.iter().enumerate() {
            if stamp[v as usize] != source {
                stamp[v as usize] = source;
                let weight = match kind {
                    ProblemKind::HittingTime => (hop + 1) as u8,
                    ProblemKind::HitProbability => 1,
                };
                pairs.push((v, pack(source, weight)));
            }
        }
    }

    let mut offsets = vec![0u32; n + 1];
    for &(v, _) in &pairs {
        offsets[v as usize + 1] += 1;
    }
    for i in 0..n {
        offsets[i + 1] += offsets[i];
    }
    let mut cursor = offsets.clone();
    let mut entries = vec![0u32; pairs.len()];
    for &(v, packed) in &pairs {
        entries[cursor[v as usize] as usize] = packed;
        cursor[v as usize] += 1;
    }
    ReplicateLists { offsets, entries }
}

/// Runs `replicates` walks per node and inverts them into the index.
/// Walk streams are the same per-(node, replicate) streams the sampling
/// estimators use, so a fixed seed pins the entire index.
pub fn build_index(
    g: &Graph,
    walk_len: u32,
    replicates: u32,
    seed: u64,
    kind: ProblemKind,
) -> Result<WalkSampleIndex> {
    let n = g.n();
    validate_index_params(n, walk_len, replicates)?;
    let build_one = |rep: u32| {
        build_replicate(n, kind, |source, steps| {
            let mut rng = WalkRng::for_node_replicate(seed, source, rep);
            let mut here = source;
            for _ in 0..walk_len {
                match g.random_neighbor(here, &mut rng) {
                    Some(next) => {
                        steps.push(next);
                        here = next;
                    }
                    None => break,
                }
            }
        })
    };
    #[cfg(feature = "parallel")]
    let lists: Vec<ReplicateLists> = (0..replicates).into_par_iter().map(build_one).collect();
    #[cfg(not(feature = "parallel"))]
    let lists: Vec<ReplicateLists> = (0..replicates).map(build_one).collect();

    let entry_total = lists.iter().map(|r| r.entries.len() as u64).sum();
    debug_assert!(entry_total <= n as u64 * replicates as u64 * walk_len as u64);
    Ok(WalkSampleIndex {
        n,
        replicates,
        walk_len,
        kind,
        seed: Some(seed),
        lists,
        entry_total,
    })
}

/// Indexes externally supplied walks instead of sampling fresh ones.
/// `walks` must hold one walk per (node, replicate) pair in source-major
/// order: `walks[node * replicates + replicate]`.
pub fn build_index_from_walks(
    g: &Graph,
    walks: &[Walk],
    walk_len: u32,
    replicates: u32,
    kind: ProblemKind,
) -> Result<WalkSampleIndex> {
    let n = g.n();
    validate_index_params(n, walk_len, replicates)?;
    let expected = n * replicates as usize;
    if walks.len() != expected {
        return Err(Error::WalkMismatch(format!(
            "expected {expected} walks ({n} nodes x {replicates} replicates), got {}",
            walks.len()
        )));
    }
    for (idx, walk) in walks.iter().enumerate() {
        let source = (idx / replicates as usize) as u32;
        if walk.source != source {
            return Err(Error::WalkMismatch(format!(
                "walk {idx} has source {} but slot expects {source} (source-major order)",
                walk.source
            )));
        }
        if walk.steps.len() > walk_len as usize {
            return Err(Error::WalkMismatch(format!(
                "walk {idx} has {} steps, horizon is {walk_len}",
                walk.steps.len()
            )));
        }
        let mut here = walk.source;
        for &next in &walk.steps {
            if !g.has_edge(here, next) {
                return Err(Error::WalkMismatch(format!(
                    "walk {idx} steps across the non-edge ({here}, {next})"
                )));
            }
            here = next;
        }
    }
    let lists: Vec<ReplicateLists> = (0..replicates)
        .map(|rep| {
            build_replicate(n, kind, |source, steps| {
                let walk = &walks[source as usize * replicates as usize + rep as usize];
                steps.extend_from_slice(&walk.steps);
            })
        })
        .collect();
    let entry_total = lists.iter().map(|r| r.entries.len() as u64).sum();
    Ok(WalkSampleIndex {
        n,
        replicates,
        walk_len,
        kind,
        seed: None,
        lists,
        entry_total,
    })
}

impl WalkSampleIndex {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn replicates(&self) -> u32 {
        self.replicates
    }

    pub fn walk_len(&self) -> u32 {
        self.walk_len
    }

    pub fn kind(&self) -> ProblemKind {
        self.kind
    }

    /// Seed the walks were drawn from; `None` for injected walks.
    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn entry_count(&self) -> u64 {
        self.entry_total
    }

    /// Entries of one inverted list, sorted by source.
    pub fn list(&self, replicate: u32, node: u32) -> impl Iterator<Item = IndexEntry> + '_ {
        self.lists[replicate as usize]
            .list(node)
            .iter()
            .map(|&p| unpack(p))
    }

    /// Bytes held by the packed entries and offsets.
    pub fn memory_bytes(&self) -> u64 {
        self.lists
            .iter()
            .map(|r| 4 * (r.entries.len() as u64 + r.offsets.len() as u64))
            .sum()
    }

    /// Debug dump: one line per entry, `replicate target source weight` in
    /// original node IDs, sorted by that tuple.
    pub fn dump(&self, g: &Graph) -> String {
        let mut out = String::new();
        for rep in 0..self.replicates {
            for v in 0..self.n as u32 {
                for entry in self.list(rep, v) {
                    out.push_str(&format!(
                        "{rep} {} {} {}\n",
                        g.original_id(v),
                        g.original_id(entry.source),
                        entry.weight
                    ));
                }
            }
        }
        out
    }
}

/// Per-sample selection state: for each (replicate, node), the hop at which
/// that replicate's walk first reaches the current selection (horizon =
/// miss) for the hitting-time problem, or a hit bit for the
/// hit-probability problem. `totals` caches the per-node sum across
/// replicates so gain scans touch only the inverted lists.
pub struct GainState {
    kind: ProblemKind,
    n: usize,
    replicates: u32,
    walk_len: u32,
    hops: Vec<u8>,
    bits: Vec<u64>,
    bit_stride: usize,
    totals: Vec<u64>,
    selected: NodeSet,
    order: Vec<u32>,
}

impl GainState {
    pub fn new(index: &WalkSampleIndex) -> Self {
        let n = index.n;
        let r = index.replicates;
        match index.kind {
            ProblemKind::HittingTime => GainState {
                kind: index.kind,
                n,
                replicates: r,
                walk_len: index.walk_len,
                hops: vec![index.walk_len as u8; n * r as usize],
                bits: Vec::new(),
                bit_stride: 0,
                totals: vec![index.walk_len as u64 * r as u64; n],
                selected: NodeSet::new(n),
                order: Vec::new(),
            },
            ProblemKind::HitProbability => {
                let stride = n.div_ceil(64);
                GainState {
                    kind: index.kind,
                    n,
                    replicates: r,
                    walk_len: index.walk_len,
                    hops: Vec::new(),
                    bits: vec![0u64; stride * r as usize],
                    bit_stride: stride,
                    totals: vec![0u64; n],
                    selected: NodeSet::new(n),
                    order: Vec::new(),
                }
            }
        }
    }

    pub fn kind(&self) -> ProblemKind {
        self.kind
    }

    pub fn selected(&self) -> &NodeSet {
        &self.selected
    }

    pub fn selection_order(&self) -> &[u32] {
        &self.order
    }

    /// First-hit hop estimate for one (replicate, node) cell
    /// (hitting-time state only).
    pub fn hop_estimate(&self, replicate: u32, node: u32) -> u32 {
        assert_eq!(self.kind, ProblemKind::HittingTime);
        self.hops[replicate as usize * self.n + node as usize] as u32
    }

    /// Hit indicator for one (replicate, node) cell (hit-probability state
    /// only).
    pub fn is_hit(&self, replicate: u32, node: u32) -> bool {
        assert_eq!(self.kind, ProblemKind::HitProbability);
        let idx = node as usize;
        self.bits[replicate as usize * self.bit_stride + (idx >> 6)] >> (idx & 63) & 1 == 1
    }

    /// Sum of the per-replicate cell values for one node.
    pub fn node_total(&self, node: u32) -> u64 {
        self.totals[node as usize]
    }

    /// Objective estimate implied by the current state (the sampled
    /// counterpart of the exact objective).
    pub fn objective_estimate(&self) -> f64 {
        let r = self.replicates as f64;
        let sum: u64 = self.totals.iter().sum();
        match self.kind {
            ProblemKind::HittingTime => {
                self.n as f64 * self.walk_len as f64 - sum as f64 / r
            }
            ProblemKind::HitProbability => sum as f64 / r,
        }
    }

    pub fn memory_bytes(&self) -> u64 {
        self.hops.len() as u64 + 8 * self.bits.len() as u64 + 8 * self.totals.len() as u64
    }
}

/// Integer gain total (gain times replicate count) for one candidate.
fn gain_total(index: &WalkSampleIndex, state: &GainState, candidate: u32) -> u64 {
    let n = state.n;
    let u = candidate;
    match state.kind {
        ProblemKind::HittingTime => {
            let mut total = state.totals[u as usize];
            for (rep, lists) in index.lists.iter().enumerate() {
                let row = &state.hops[rep * n..(rep + 1) * n];
                for &packed in lists.list(u) {
                    let e = unpack(packed);
                    let d = row[e.source as usize] as u32;
                    if (e.weight as u32) < d {
                        total += (d - e.weight as u32) as u64;
                    }
                }
            }
            total
        }
        ProblemKind::HitProbability => {
            let mut total = state.replicates as u64 - state.totals[u as usize];
            for (rep, lists) in index.lists.iter().enumerate() {
                let row = &state.bits[rep * state.bit_stride..(rep + 1) * state.bit_stride];
                for &packed in lists.list(u) {
                    let v = (packed >> 8) as usize;
                    if row[v >> 6] >> (v & 63) & 1 == 0 {
                        total += 1;
                    }
                }
            }
            total
        }
    }
}

/// Estimated marginal gain of adding `candidate` to the current selection.
/// Non-mutating; reads the index and state only.
pub fn approx_gain(index: &WalkSampleIndex, state: &GainState, candidate: u32) -> f64 {
    debug_assert!(!state.selected.contains(candidate));
    gain_total(index, state, candidate) as f64 / state.replicates as f64
}

/// Per-replicate contributions behind [`approx_gain`] (their mean is the
/// gain). Diagnostic; used by convergence tests.
pub fn approx_gain_components(
    index: &WalkSampleIndex,
    state: &GainState,
    candidate: u32,
) -> Vec<u64> {
    let n = state.n;
    let u = candidate;
    (0..state.replicates as usize)
        .map(|rep| {
            let lists = &index.lists[rep];
            match state.kind {
                ProblemKind::HittingTime => {
                    let row = &state.hops[rep * n..(rep + 1) * n];
                    let mut total = row[u as usize] as u64;
                    for &packed in lists.list(u) {
                        let e = unpack(packed);
                        let d = row[e.source as usize] as u32;
                        if (e.weight as u32) < d {
                            total += (d - e.weight as u32) as u64;
                        }
                    }
                    total
                }
                ProblemKind::HitProbability => {
                    let row = &state.bits[rep * state.bit_stride..(rep + 1) * state.bit_stride];
                    let hit = |v: usize| row[v >> 6] >> (v & 63) & 1 == 1;
                    let mut total = u64::from(!hit(u as usize));
                    for &packed in lists.list(u) {
                        if !hit((packed >> 8) as usize) {
                            total += 1;
                        }
                    }
                    total
                }
            }
        })
        .collect()
}

/// Folds a just-selected node into the state: its own cells drop to the
/// hit value, and every source whose indexed arrival beats the current
/// first-hit improves. Cost is linear in the node's list sizes.
pub fn apply_update(index: &WalkSampleIndex, state: &mut GainState, winner: u32) -> Result<()> {
    if state.selected.contains(winner) {
        return Err(Error::AlreadySelected {
            node: winner as u64,
        });
    }
    let n = state.n;
    match state.kind {
        ProblemKind::HittingTime => {
            for (rep, lists) in index.lists.iter().enumerate() {
                let row = &mut state.hops[rep * n..(rep + 1) * n];
                let old = row[winner as usize] as u64;
                row[winner as usize] = 0;
                state.totals[winner as usize] -= old;
                for &packed in lists.list(winner) {
                    let e = unpack(packed);
                    let d = row[e.source as usize];
                    if e.weight < d {
                        state.totals[e.source as usize] -= (d - e.weight) as u64;
                        row[e.source as usize] = e.weight;
                    }
                }
            }
        }
        ProblemKind::HitProbability => {
            for (rep, lists) in index.lists.iter().enumerate() {
                let row = &mut state.bits[rep * state.bit_stride..(rep + 1) * state.bit_stride];
                let widx = winner as usize;
                if row[widx >> 6] >> (widx & 63) & 1 == 0 {
                    row[widx >> 6] |= 1 << (widx & 63);
                    state.totals[widx] += 1;
                }
                for &packed in lists.list(winner) {
                    let v = (packed >> 8) as usize;
                    if row[v >> 6] >> (v & 63) & 1 == 0 {
                        row[v >> 6] |= 1 << (v & 63);
                        state.totals[v] += 1;
                    }
                }
            }
        }
    }
    state.selected.insert(winner);
    state.order.push(winner);
    Ok(())
}

/// List-scan gain term for every node over a replicate range.
fn scan_replicates(index: &WalkSampleIndex, state: &GainState, range: Range<usize>) -> Vec<u64> {
    let n = state.n;
    let mut acc = vec![0u64; n];
    match state.kind {
        ProblemKind::HittingTime => {
            for rep in range {
                let lists = &index.lists[rep];
                let row = &state.hops[rep * n..(rep + 1) * n];
                for u in 0..n {
                    let lo = lists.offsets[u] as usize;
                    let hi = lists.offsets[u + 1] as usize;
                    if lo == hi {
                        continue;
                    }
                    let mut local = 0u64;
                    for &packed in &lists.entries[lo..hi] {
                        let v = (packed >> 8) as usize;
                        let w = packed & 0xff;
                        let d = row[v] as u32;
                        if w < d {
                            local += (d - w) as u64;
                        }
                    }
                    acc[u] += local;
                }
            }
        }
        ProblemKind::HitProbability => {
            for rep in range {
                let lists = &index.lists[rep];
                let row = &state.bits[rep * state.bit_stride..(rep + 1) * state.bit_stride];
                for u in 0..n {
                    let lo = lists.offsets[u] as usize;
                    let hi = lists.offsets[u + 1] as usize;
                    if lo == hi {
                        continue;
                    }
                    let mut local = 0u64;
                    for &packed in &lists.entries[lo..hi] {
                        let v = (packed >> 8) as usize;
                        if row[v >> 6] >> (v & 63) & 1 == 0 {
                            local += 1;
                        }
                    }
                    acc[u] += local;
                }
            }
        }
    }
    acc
}

/// Gain totals for all candidates in one pass over the index. Equals
/// [`approx_gain`] times the replicate count, entry for entry; integer
/// arithmetic keeps the result schedule-independent.
fn batch_gain_totals(index: &WalkSampleIndex, state: &GainState) -> Vec<u64> {
    let r = state.replicates as usize;
    #[cfg(feature = "parallel")]
    let mut merged = {
        let threads = rayon::current_num_threads().max(1);
        let chunk = r.div_ceil(threads);
        let ranges: Vec<Range<usize>> = (0..r)
            .step_by(chunk)
            .map(|lo| lo..(lo + chunk).min(r))
            .collect();
        ranges
            .into_par_iter()
            .map(|range| scan_replicates(index, state, range))
            .reduce(
                || vec![0u64; state.n],
                |mut a, b| {
                    for (x, y) in a.iter_mut().zip(b) {
                        *x += y;
                    }
                    a
                },
            )
    };
    #[cfg(not(feature = "parallel"))]
    let mut merged = scan_replicates(index, state, 0..r);

    match state.kind {
        ProblemKind::HittingTime => {
            for (total, &cached) in merged.iter_mut().zip(&state.totals) {
                *total += cached;
            }
        }
        ProblemKind::HitProbability => {
            for (total, &cached) in merged.iter_mut().zip(&state.totals) {
                *total += state.replicates as u64 - cached;
            }
        }
    }
    merged
}

/// Builds the index once, then runs `k` greedy rounds of batch gain
/// evaluation and incremental state updates (ties to the lowest node ID).
pub fn approx_greedy(
    g: &Graph,
    k: usize,
    walk_len: u32,
    replicates: u32,
    kind: ProblemKind,
    seed: u64,
    trace: bool,
) -> Result<SelectionResult> {
    let t0 = Instant::now();
    let index = build_index(g, walk_len, replicates, seed, kind)?;
    let index_ms = t0.elapsed().as_millis() as u64;
    select_over_index(&index, k, trace, index_ms)
}

/// The same driver over injected walks (testing hook).
pub fn approx_greedy_from_walks(
    g: &Graph,
    walks: &[Walk],
    k: usize,
    walk_len: u32,
    replicates: u32,
    kind: ProblemKind,
    trace: bool,
) -> Result<SelectionResult> {
    let t0 = Instant::now();
    let index = build_index_from_walks(g, walks, walk_len, replicates, kind)?;
    let index_ms = t0.elapsed().as_millis() as u64;
    select_over_index(&index, k, trace, index_ms)
}

/// Greedy rounds over an existing index.
pub fn select_over_index(
    index: &WalkSampleIndex,
    k: usize,
    trace: bool,
    index_ms: u64,
) -> Result<SelectionResult> {
    let t0 = Instant::now();
    let n = index.n;
    let mut warnings = Vec::new();
    let budget = if k > n {
        warnings.push(format!("budget {k} clamped to node count {n}"));
        n
    } else {
        k
    };
    let mut state = GainState::new(index);
    let mut selected = Vec::with_capacity(budget);
    let mut gains = Vec::with_capacity(budget);
    let mut objective_trace = trace.then(Vec::new);
    let mut oracle_calls = 0u64;

    for _ in 0..budget {
        let totals = batch_gain_totals(index, &state);
        oracle_calls += (n - state.selected.len()) as u64;
        let mut best: Option<(u32, u64)> = None;
        for u in 0..n as u32 {
            if state.selected.contains(u) {
                continue;
            }
            let total = totals[u as usize];
            if best.is_none_or(|(_, b)| total > b) {
                best = Some((u, total));
            }
        }
        let (winner, total) = best.expect("budget <= n leaves a candidate");
        selected.push(winner);
        gains.push(total as f64 / index.replicates as f64);
        apply_update(index, &mut state, winner)?;
        if let Some(tr) = objective_trace.as_mut() {
            tr.push(state.objective_estimate());
        }
    }

    let select_ms = t0.elapsed().as_millis() as u64;
    let label = match index.kind {
        ProblemKind::HittingTime => "approxf1",
        ProblemKind::HitProbability => "approxf2",
    };
    Ok(SelectionResult {
        config: SelectConfig {
            algorithm: label.to_string(),
            k: k as u32,
            walk_len: index.walk_len,
            samples: Some(index.replicates),
            seed: index.seed,
            lazy: false,
            trace,
        },
        selected,
        gains,
        objective_trace,
        oracle_calls,
        elapsed: PhaseTimings {
            index_ms,
            select_ms,
        },
        warnings,
    })
}
