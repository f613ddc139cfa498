//! Small variable sets packed into a bitmask.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Maximum number of variables any model in this crate may have.
pub const MAX_VARS: usize = 64;

/// A set of variable indices in `0..64`.
///
/// Ordering is by (cardinality, sorted index vector), which is the order
/// used when searching for minimal regressor sets.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "Vec<usize>", from = "Vec<usize>")]
pub struct VarSet(u64);

impl VarSet {
    pub const EMPTY: VarSet = VarSet(0);

    pub fn from_bits(bits: u64) -> Self {
        VarSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn singleton(v: usize) -> Self {
        debug_assert!(v < MAX_VARS);
        VarSet(1 << v)
    }

    /// `{0, .., p-1}`.
    pub fn full(p: usize) -> Self {
        debug_assert!(p <= MAX_VARS);
        if p == MAX_VARS {
            VarSet(u64::MAX)
        } else {
            VarSet((1u64 << p) - 1)
        }
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, v: usize) -> bool {
        v < MAX_VARS && self.0 & (1 << v) != 0
    }

    pub fn with(self, v: usize) -> Self {
        VarSet(self.0 | (1 << v))
    }

    pub fn without(self, v: usize) -> Self {
        VarSet(self.0 & !(1 << v))
    }

    pub fn insert(&mut self, v: usize) {
        self.0 |= 1 << v;
    }

    pub fn remove(&mut self, v: usize) {
        self.0 &= !(1 << v);
    }

    pub fn union(self, other: Self) -> Self {
        VarSet(self.0 | other.0)
    }

    pub fn intersection(self, other: Self) -> Self {
        VarSet(self.0 & other.0)
    }

    pub fn difference(self, other: Self) -> Self {
        VarSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    /// Members in increasing order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let v = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(v)
            }
        })
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.iter().collect()
    }

    /// Every subset of `self`, in no particular order, the empty set included.
    pub fn subsets(self) -> impl Iterator<Item = VarSet> {
        // Standard submask walk: sub = (sub - 1) & mask.
        let mask = self.0;
        let mut next = Some(mask);
        std::iter::from_fn(move || {
            let cur = next?;
            next = if cur == 0 { None } else { Some((cur - 1) & mask) };
            Some(VarSet(cur))
        })
    }

    /// Subsets of `self` with at most `max_len` members, sorted by
    /// cardinality and then lexicographically by sorted index vector.
    pub fn subsets_by_size(self, max_len: usize) -> Vec<VarSet> {
        let mut out: Vec<VarSet> = self.subsets().filter(|s| s.len() <= max_len).collect();
        out.sort();
        out
    }
}

impl Ord for VarSet {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.len().cmp(&other.len()).then_with(|| self.iter().cmp(other.iter()))
    }
}

impl PartialOrd for VarSet {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl FromIterator<usize> for VarSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        let mut s = VarSet::EMPTY;
        for v in iter {
            s.insert(v);
        }
        s
    }
}

impl From<&[usize]> for VarSet {
    fn from(vars: &[usize]) -> Self {
        vars.iter().copied().collect()
    }
}

impl From<Vec<usize>> for VarSet {
    fn from(vars: Vec<usize>) -> Self {
        vars.into_iter().collect()
    }
}

impl From<VarSet> for Vec<usize> {
    fn from(s: VarSet) -> Self {
        s.to_vec()
    }
}

impl fmt::Debug for VarSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}
