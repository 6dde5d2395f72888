//! Immutable undirected graphs in compressed adjacency form, plus edge-list
//! ingestion and a preferential-attachment generator.
//!
//! Node IDs are dense `0..n` internally. Input files may use arbitrary
//! nonnegative integer IDs; they are remapped (order-preserving) and the
//! original IDs are retained for output.

use crate::error::{Error, Result};
use crate::rng::{mix2, WalkRng};

/// How to treat nodes with no neighbors.
///
/// Under `Reject` (the default) such graphs fail at construction, so every
/// node of a constructed graph has at least one neighbor. Under `SelfLoop`
/// an isolated node behaves as if it had a single self-loop: a walk starting
/// there never leaves it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IsolatedPolicy {
    #[default]
    Reject,
    SelfLoop,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ParseOptions {
    /// Drop self-loop lines instead of failing on them.
    pub skip_self_loops: bool,
    pub isolated: IsolatedPolicy,
}

/// Undirected, unweighted graph. Adjacency lists are sorted; no self-loops
/// or duplicate edges survive construction.
#[derive(Debug, Clone)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<u32>,
    /// Original input ID per dense node; identity for generated graphs.
    original: Vec<u64>,
    isolated: IsolatedPolicy,
}

impl Graph {
    /// Builds a graph over dense IDs `0..n` from an edge list. Duplicate
    /// and reversed-duplicate edges collapse; self-loops are an error.
    pub fn from_edges(n: usize, edges: &[(u32, u32)], isolated: IsolatedPolicy) -> Result<Graph> {
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        let mut norm: Vec<(u32, u32)> = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a as usize >= n || b as usize >= n {
                return Err(Error::InvalidParameter(format!(
                    "edge ({a}, {b}) references a node outside 0..{n}"
                )));
            }
            if a == b {
                return Err(Error::SelfLoop { line: 0, node: a as u64 });
            }
            norm.push((a.min(b), a.max(b)));
        }
        norm.sort_unstable();
        norm.dedup();
        let original = (0..n as u64).collect();
        Graph::from_normalized(n, norm, original, isolated)
    }

    /// `norm` must be sorted, deduplicated (min, max) pairs.
    fn from_normalized(
        n: usize,
        norm: Vec<(u32, u32)>,
        original: Vec<u64>,
        isolated: IsolatedPolicy,
    ) -> Result<Graph> {
        let mut degrees = vec![0usize; n];
        for &(a, b) in &norm {
            degrees[a as usize] += 1;
            degrees[b as usize] += 1;
        }
        if isolated == IsolatedPolicy::Reject {
            if let Some(u) = degrees.iter().position(|&d| d == 0) {
                return Err(Error::IsolatedNode { node: original[u] });
            }
        }
        let mut offsets = vec![0usize; n + 1];
        for u in 0..n {
            offsets[u + 1] = offsets[u] + degrees[u];
        }
        let mut cursor = offsets.clone();
        let mut targets = vec![0u32; 2 * norm.len()];
        // Iterating (min, max)-sorted edges fills every adjacency list in
        // ascending order: a node first receives its smaller neighbors
        // (as the max endpoint) and then its larger ones (as the min).
        for &(a, b) in &norm {
            targets[cursor[a as usize]] = b;
            cursor[a as usize] += 1;
            targets[cursor[b as usize]] = a;
            cursor[b as usize] += 1;
        }
        Ok(Graph {
            offsets,
            targets,
            original,
            isolated,
        })
    }

    /// Parses edge-list text: one `<u> <v>` pair per line, arbitrary
    /// whitespace, `#`-prefixed comment lines ignored. Sparse IDs are
    /// remapped to `0..n` preserving numeric order.
    pub fn parse_edge_list(text: &str, opts: ParseOptions) -> Result<Graph> {
        let mut raw: Vec<(u64, u64)> = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut tokens = line.split_whitespace();
            let a = parse_id(tokens.next(), line_no, line)?;
            let b = parse_id(tokens.next(), line_no, line)?;
            if tokens.next().is_some() {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("expected two node IDs, got extra tokens in '{line}'"),
                });
            }
            if a == b {
                if opts.skip_self_loops {
                    continue;
                }
                return Err(Error::SelfLoop { line: line_no, node: a });
            }
            raw.push((a.min(b), a.max(b)));
        }
        if raw.is_empty() {
            return Err(Error::EmptyGraph);
        }

        let mut ids: Vec<u64> = raw.iter().flat_map(|&(a, b)| [a, b]).collect();
        ids.sort_unstable();
        ids.dedup();
        let n = ids.len();
        if n > u32::MAX as usize {
            return Err(Error::InvalidParameter(format!(
                "{n} nodes exceed the supported node-count range"
            )));
        }
        let dense = |id: u64| ids.binary_search(&id).unwrap() as u32;
        let mut norm: Vec<(u32, u32)> = raw.iter().map(|&(a, b)| (dense(a), dense(b))).collect();
        norm.sort_unstable();
        norm.dedup();
        Graph::from_normalized(n, norm, ids, opts.isolated)
    }

    /// Canonical edge-list serialization: edges sorted by
    /// `(min endpoint, max endpoint)` in original-ID space, one per line,
    /// single space separator, trailing newline.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::with_capacity(self.m() * 12);
        for u in 0..self.n() as u32 {
            for &v in self.neighbors(u) {
                if v > u {
                    out.push_str(&format!("{} {}\n", self.original[u as usize], self.original[v as usize]));
                }
            }
        }
        out
    }

    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Undirected edge count.
    pub fn m(&self) -> usize {
        self.targets.len() / 2
    }

    #[inline]
    pub fn degree(&self, u: u32) -> usize {
        self.offsets[u as usize + 1] - self.offsets[u as usize]
    }

    #[inline]
    pub fn neighbors(&self, u: u32) -> &[u32] {
        &self.targets[self.offsets[u as usize]..self.offsets[u as usize + 1]]
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    pub fn isolated_policy(&self) -> IsolatedPolicy {
        self.isolated
    }

    pub fn original_id(&self, u: u32) -> u64 {
        self.original[u as usize]
    }

    /// Dense ID for an original input ID, if present.
    pub fn dense_id(&self, original: u64) -> Option<u32> {
        // `original` is ascending because the remap sorts unique input IDs.
        self.original.binary_search(&original).ok().map(|i| i as u32)
    }

    /// One-step transition probability of the uniform walk. For a
    /// `SelfLoop`-policy isolated node the walk stays put, so the mass sits
    /// on the node itself.
    pub fn transition_prob(&self, u: u32, w: u32) -> f64 {
        let d = self.degree(u);
        if d == 0 {
            return if u == w { 1.0 } else { 0.0 };
        }
        if self.has_edge(u, w) {
            1.0 / d as f64
        } else {
            0.0
        }
    }

    /// Uniform random neighbor; `None` only for an isolated node.
    #[inline]
    pub fn random_neighbor(&self, u: u32, rng: &mut WalkRng) -> Option<u32> {
        let nbrs = self.neighbors(u);
        if nbrs.is_empty() {
            return None;
        }
        Some(nbrs[rng.next_below(nbrs.len() as u64) as usize])
    }

    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.n() as u32).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }
}

fn parse_id(token: Option<&str>, line_no: usize, line: &str) -> Result<u64> {
    let token = token.ok_or_else(|| Error::Parse {
        line: line_no,
        msg: format!("expected two node IDs in '{line}'"),
    })?;
    token.parse::<u64>().map_err(|_| Error::Parse {
        line: line_no,
        msg: format!("'{token}' is not a nonnegative integer node ID"),
    })
}

const GEN_SALT: u64 = 0x6765_6e5f_7077_6c67;

/// Connected preferential-attachment graph: a path over the first
/// `edges_per_node + 1` nodes, then each new node attaches to
/// `edges_per_node` distinct existing nodes sampled proportionally to
/// degree. Deterministic for a fixed seed.
pub fn generate_power_law(n: usize, edges_per_node: usize, seed: u64) -> Result<Graph> {
    if edges_per_node < 1 {
        return Err(Error::InvalidParameter(
            "edges_per_node must be at least 1".into(),
        ));
    }
    if n < edges_per_node + 1 {
        return Err(Error::InvalidParameter(format!(
            "need at least edges_per_node + 1 = {} nodes, got {n}",
            edges_per_node + 1
        )));
    }
    let mut rng = WalkRng::new(mix2(seed, GEN_SALT));
    let seed_nodes = edges_per_node + 1;
    let mut edges: Vec<(u32, u32)> = Vec::with_capacity(edges_per_node * n);
    // Each node appears once per unit of degree; uniform draws from this
    // list are degree-proportional draws.
    let mut endpoint_pool: Vec<u32> = Vec::with_capacity(2 * edges_per_node * n);
    for v in 1..seed_nodes as u32 {
        edges.push((v - 1, v));
        endpoint_pool.push(v - 1);
        endpoint_pool.push(v);
    }
    let mut picked: Vec<u32> = Vec::with_capacity(edges_per_node);
    for v in seed_nodes as u32..n as u32 {
        picked.clear();
        while picked.len() < edges_per_node {
            let t = endpoint_pool[rng.next_below(endpoint_pool.len() as u64) as usize];
            if t != v && !picked.contains(&t) {
                picked.push(t);
            }
        }
        for &t in &picked {
            edges.push((v, t));
            endpoint_pool.push(v);
            endpoint_pool.push(t);
        }
    }
    Graph::from_edges(n, &edges, IsolatedPolicy::Reject)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_path_graph() {
        let g = Graph::parse_edge_list("0 1\n1 2\n", ParseOptions::default()).unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(g.m(), 2);
        assert_eq!(g.neighbors(1), &[0, 2]);
        assert_eq!(g.degree(0), 1);
    }

    #[test]
    fn duplicate_and_reversed_lines_collapse() {
        let g = Graph::parse_edge_list("0 1\n1 0\n0 1\n", ParseOptions::default()).unwrap();
        assert_eq!(g.n(), 2);
        assert_eq!(g.m(), 1);
    }

    #[test]
    fn self_loop_is_rejected_or_skipped() {
        let err = Graph::parse_edge_list("0 0\n", ParseOptions::default()).unwrap_err();
        assert!(matches!(err, Error::SelfLoop { line: 1, node: 0 }));

        let opts = ParseOptions {
            skip_self_loops: true,
            ..Default::default()
        };
        let err = Graph::parse_edge_list("0 0\n", opts).unwrap_err();
        assert!(matches!(err, Error::EmptyGraph));
        let g = Graph::parse_edge_list("0 0\n1 2\n", opts).unwrap();
        assert_eq!(g.n(), 2);
    }

    #[test]
    fn malformed_lines_report_the_line_number() {
        let err = Graph::parse_edge_list("0 1\nx 2\n", ParseOptions::default()).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
        let err = Graph::parse_edge_list("0\n", ParseOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = Graph::parse_edge_list("0 1 2\n", ParseOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let g = Graph::parse_edge_list("# header\n\n 3   7 \n# tail\n", ParseOptions::default())
            .unwrap();
        assert_eq!(g.n(), 2);
        assert_eq!(g.original_id(0), 3);
        assert_eq!(g.original_id(1), 7);
        assert_eq!(g.dense_id(7), Some(1));
        assert_eq!(g.dense_id(4), None);
    }

    #[test]
    fn sparse_ids_are_remapped_in_order() {
        let g = Graph::parse_edge_list("100 5\n5 42\n", ParseOptions::default()).unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(g.original_id(0), 5);
        assert_eq!(g.original_id(1), 42);
        assert_eq!(g.original_id(2), 100);
        assert!(g.has_edge(0, 2));
        assert!(g.has_edge(0, 1));
        assert!(!g.has_edge(1, 2));
    }

    #[test]
    fn transition_probabilities() {
        let path = Graph::from_edges(3, &[(0, 1), (1, 2)], IsolatedPolicy::Reject).unwrap();
        assert_eq!(path.transition_prob(1, 0), 0.5);
        assert_eq!(path.transition_prob(0, 2), 0.0);

        let star = Graph::from_edges(5, &[(0, 1), (0, 2), (0, 3), (0, 4)], IsolatedPolicy::Reject)
            .unwrap();
        assert_eq!(star.transition_prob(0, 3), 0.25);
    }

    #[test]
    fn transition_probabilities_sum_to_one() {
        let g = generate_power_law(60, 3, 11).unwrap();
        for u in 0..g.n() as u32 {
            let total: f64 = (0..g.n() as u32).map(|w| g.transition_prob(u, w)).sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn isolated_nodes_follow_the_policy() {
        let err = Graph::from_edges(3, &[(0, 1)], IsolatedPolicy::Reject).unwrap_err();
        assert!(matches!(err, Error::IsolatedNode { node: 2 }));

        let g = Graph::from_edges(3, &[(0, 1)], IsolatedPolicy::SelfLoop).unwrap();
        assert_eq!(g.degree(2), 0);
        assert_eq!(g.transition_prob(2, 2), 1.0);
        assert_eq!(g.transition_prob(2, 0), 0.0);
    }

    #[test]
    fn serialization_round_trips() {
        let g = Graph::parse_edge_list("9 2\n2 0\n9 0\n", ParseOptions::default()).unwrap();
        let text = g.to_edge_list();
        assert_eq!(text, "0 2\n0 9\n2 9\n");
        let g2 = Graph::parse_edge_list(&text, ParseOptions::default()).unwrap();
        assert_eq!(g.offsets, g2.offsets);
        assert_eq!(g.targets, g2.targets);
        assert_eq!(g.original, g2.original);
    }

    #[test]
    fn power_law_matches_requested_size() {
        let g = generate_power_law(1000, 10, 7).unwrap();
        assert_eq!(g.n(), 1000);
        assert!((9900..=10000).contains(&g.m()), "m = {}", g.m());
    }

    #[test]
    fn power_law_single_attachment_is_a_tree() {
        let g = generate_power_law(5, 1, 1).unwrap();
        assert_eq!(g.n(), 5);
        assert_eq!(g.m(), 4);
        // Connectivity check: BFS reaches every node.
        let mut seen = vec![false; 5];
        let mut stack = vec![0u32];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &v in g.neighbors(u) {
                if !seen[v as usize] {
                    seen[v as usize] = true;
                    stack.push(v);
                }
            }
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn power_law_is_deterministic() {
        let a = generate_power_law(200, 4, 99).unwrap();
        let b = generate_power_law(200, 4, 99).unwrap();
        assert_eq!(a.to_edge_list(), b.to_edge_list());
        let c = generate_power_law(200, 4, 100).unwrap();
        assert_ne!(a.to_edge_list(), c.to_edge_list());
    }

    #[test]
    fn power_law_degrees_are_heavy_tailed() {
        let g = generate_power_law(600, 5, 3).unwrap();
        let mut degs: Vec<usize> = (0..g.n() as u32).map(|u| g.degree(u)).collect();
        degs.sort_unstable();
        let median = degs[degs.len() / 2];
        let max = *degs.last().unwrap();
        assert!(
            max >= 3 * median,
            "max degree {max} not >= 3x median {median}"
        );
    }

    #[test]
    fn power_law_rejects_bad_parameters() {
        assert!(generate_power_law(3, 5, 1).is_err());
        assert!(generate_power_law(10, 0, 1).is_err());
    }
}
