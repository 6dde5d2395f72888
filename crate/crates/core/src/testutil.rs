//! Seeded graph fixtures shared by unit, property, and acceptance tests.

use crate::graph::{Graph, IsolatedPolicy};
use crate::rng::{mix2, WalkRng};

/// Random connected graph with 2..=max_n nodes: a random spanning tree plus
/// a sprinkle of extra edges. Deterministic per seed.
pub fn random_connected_graph(seed: u64, max_n: usize) -> Graph {
    let mut rng = WalkRng::new(mix2(seed, 0x7465_7374));
    let n = 2 + rng.next_below(max_n as u64 - 1) as usize;
    random_connected_graph_exact(seed, n)
}

/// Same, with the node count fixed.
pub fn random_connected_graph_exact(seed: u64, n: usize) -> Graph {
    assert!(n >= 2);
    let mut rng = WalkRng::new(mix2(seed, 0x7472_6565));
    let mut edges = Vec::new();
    for v in 1..n as u32 {
        let parent = rng.next_below(v as u64) as u32;
        edges.push((parent, v));
    }
    let extras = rng.next_below(n as u64) as usize;
    for _ in 0..extras {
        let a = rng.next_below(n as u64) as u32;
        let b = rng.next_below(n as u64) as u32;
        if a != b {
            edges.push((a.min(b), a.max(b)));
        }
    }
    Graph::from_edges(n, &edges, IsolatedPolicy::Reject).unwrap()
}

/// Path graph 0 - 1 - ... - (n-1).
pub fn path(n: usize) -> Graph {
    let edges: Vec<(u32, u32)> = (1..n as u32).map(|v| (v - 1, v)).collect();
    Graph::from_edges(n, &edges, IsolatedPolicy::Reject).unwrap()
}

/// Star with `leaves` leaves; node 0 is the center.
pub fn star(leaves: usize) -> Graph {
    let edges: Vec<(u32, u32)> = (1..=leaves as u32).map(|v| (0, v)).collect();
    Graph::from_edges(leaves + 1, &edges, IsolatedPolicy::Reject).unwrap()
}

/// Cycle over n nodes.
pub fn cycle(n: usize) -> Graph {
    let edges: Vec<(u32, u32)> = (0..n as u32).map(|u| (u, (u + 1) % n as u32)).collect();
    Graph::from_edges(n, &edges, IsolatedPolicy::Reject).unwrap()
}
