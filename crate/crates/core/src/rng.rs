//! Counter-based pseudo-random streams.
//!
//! Every stochastic routine in this crate draws from a [`WalkRng`] derived
//! from a user seed plus a stream key (typically a `(node, replicate)`
//! pair). Streams are independent of evaluation order and of the parallel
//! schedule, so results are reproducible whether the work runs on one
//! thread or many.

/// SplitMix64 finalizer. Good avalanche, cheap, and stable across releases.
#[inline]
pub fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Combines a base seed with a salt/key into a new seed.
#[inline]
pub fn mix2(seed: u64, key: u64) -> u64 {
    mix(seed ^ mix(key))
}

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// A SplitMix64 generator: a counter advanced by a fixed gamma, with the
/// finalizer applied per output.
#[derive(Debug, Clone)]
pub struct WalkRng {
    state: u64,
}

impl WalkRng {
    pub fn new(seed: u64) -> Self {
        WalkRng { state: seed }
    }

    /// Stream for a `(node, replicate)` pair. Distinct pairs never share a
    /// key for replicate counts below 2^32.
    pub fn for_node_replicate(seed: u64, node: u32, replicate: u32) -> Self {
        let key = ((node as u64) << 32) | replicate as u64;
        WalkRng::new(mix2(seed, key))
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix(self.state)
    }

    /// Uniform draw in `0..bound` via widening multiply. `bound` must be
    /// nonzero.
    #[inline]
    pub fn next_below(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        (((self.next_u64() as u128) * (bound as u128)) >> 64) as u64
    }

    /// Uniform draw in `[0, 1)`.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}
