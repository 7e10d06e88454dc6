use std::fmt;

use serde::{Serialize, Serializer};

/// A subset of a structure universe `{0, .., n-1}` with `n <= 64`, stored as a bitmask.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ElemSet(pub u64);

pub const MAX_UNIVERSE: usize = 64;

impl ElemSet {
    pub const EMPTY: ElemSet = ElemSet(0);

    pub fn full(n: usize) -> Self {
        debug_assert!(n <= MAX_UNIVERSE);
        if n == 64 {
            ElemSet(u64::MAX)
        } else {
            ElemSet((1u64 << n) - 1)
        }
    }

    pub fn singleton(x: usize) -> Self {
        ElemSet(1 << x)
    }

    pub fn contains(self, x: usize) -> bool {
        x < 64 && self.0 >> x & 1 == 1
    }

    pub fn insert(&mut self, x: usize) {
        self.0 |= 1 << x;
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset(self, other: ElemSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn union(self, other: ElemSet) -> ElemSet {
        ElemSet(self.0 | other.0)
    }

    pub fn intersection(self, other: ElemSet) -> ElemSet {
        ElemSet(self.0 & other.0)
    }

    /// Elements in increasing order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let x = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            Some(x)
        })
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.iter().collect()
    }

    /// Image of the set under a map on elements.
    pub fn map(self, f: &[usize]) -> ElemSet {
        self.iter().map(|x| f[x]).collect()
    }

    /// All subsets of `{0, .., n-1}` in increasing bitmask order.
    pub fn all_subsets(n: usize) -> impl Iterator<Item = ElemSet> {
        assert!(n < 64, "subset enumeration beyond 63 elements");
        (0..(1u64 << n)).map(ElemSet)
    }

    /// Positions of the elements of `self` inside the sorted list of `within`'s elements.
    pub fn relative_to(self, within: ElemSet) -> ElemSet {
        within
            .iter()
            .enumerate()
            .filter(|&(_, x)| self.contains(x))
            .map(|(i, _)| i)
            .collect()
    }
}

impl FromIterator<usize> for ElemSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut s = ElemSet::EMPTY;
        for x in iter {
            s.insert(x);
        }
        s
    }
}

impl fmt::Debug for ElemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl Serialize for ElemSet {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_positions() {
        let within: ElemSet = [1, 3, 4].into_iter().collect();
        let sub: ElemSet = [1, 4].into_iter().collect();
        assert_eq!(sub.relative_to(within).to_vec(), vec![0, 2]);
        assert_eq!(ElemSet::full(3).len(), 3);
        assert_eq!(ElemSet::all_subsets(3).count(), 8);
    }
}
