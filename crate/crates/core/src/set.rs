//! A flat bitset over dense node IDs, used for target sets and selections.

/// Membership bitmap over `0..n` with a cached element count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeSet {
    bits: Vec<u64>,
    n: usize,
    count: usize,
}

impl NodeSet {
    pub fn new(n: usize) -> Self {
        NodeSet {
            bits: vec![0; n.div_ceil(64)],
            n,
            count: 0,
        }
    }

    pub fn from_ids<I: IntoIterator<Item = u32>>(n: usize, ids: I) -> Self {
        let mut s = NodeSet::new(n);
        for id in ids {
            s.insert(id);
        }
        s
    }

    /// Universe size (not the member count).
    pub fn universe(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    #[inline]
    pub fn contains(&self, id: u32) -> bool {
        let id = id as usize;
        debug_assert!(id < self.n);
        self.bits[id >> 6] & (1u64 << (id & 63)) != 0
    }

    /// Inserts `id`; returns true if it was newly added.
    pub fn insert(&mut self, id: u32) -> bool {
        let idx = id as usize;
        assert!(idx < self.n, "node {id} out of range 0..{}", self.n);
        let word = &mut self.bits[idx >> 6];
        let mask = 1u64 << (idx & 63);
        if *word & mask != 0 {
            return false;
        }
        *word |= mask;
        self.count += 1;
        true
    }

    pub fn remove(&mut self, id: u32) -> bool {
        let idx = id as usize;
        assert!(idx < self.n);
        let word = &mut self.bits[idx >> 6];
        let mask = 1u64 << (idx & 63);
        if *word & mask == 0 {
            return false;
        }
        *word &= !mask;
        self.count -= 1;
        true
    }

    /// Ascending iterator over members.
    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.bits.iter().enumerate().flat_map(|(w, &bits)| {
            let base = (w as u32) << 6;
            BitIter { bits, base }
        })
    }

    pub fn is_subset_of(&self, other: &NodeSet) -> bool {
        self.bits
            .iter()
            .zip(&other.bits)
            .all(|(a, b)| a & !b == 0)
    }
}

struct BitIter {
    bits: u64,
    base: u32,
}

impl Iterator for BitIter {
    type Item = u32;

    fn next(&mut self) -> Option<u32> {
        if self.bits == 0 {
            return None;
        }
        let tz = self.bits.trailing_zeros();
        self.bits &= self.bits - 1;
        Some(self.base + tz)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn insert_contains_iter() {
        let mut s = NodeSet::new(130);
        assert!(s.insert(0));
        assert!(s.insert(129));
        assert!(s.insert(64));
        assert!(!s.insert(64));
        assert_eq!(s.len(), 3);
        assert!(s.contains(129));
        assert!(!s.contains(1));
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![0, 64, 129]);
        assert!(s.remove(64));
        assert!(!s.remove(64));
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn subset_check() {
        let a = NodeSet::from_ids(10, [1, 3]);
        let b = NodeSet::from_ids(10, [1, 3, 7]);
        assert!(a.is_subset_of(&b));
        assert!(!b.is_subset_of(&a));
    }
}
