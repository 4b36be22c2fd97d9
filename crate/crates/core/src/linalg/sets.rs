//! Sorted index and index-pair sets.

use crate::error::{Error, Result};

/// Sorted, deduplicated list of variable indices.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct IndexSet(Vec<usize>);

impl IndexSet {
    pub fn new() -> Self {
        Self(Vec::new())
    }

    /// Sorts and deduplicates.
    pub fn from_unsorted(mut v: Vec<usize>) -> Self {
        v.sort_unstable();
        v.dedup();
        Self(v)
    }

    pub fn range(n: usize) -> Self {
        Self((0..n).collect())
    }

    /// Builds from data that must already be sorted and unique.
    pub fn from_sorted(v: Vec<usize>) -> Result<Self> {
        if v.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "index set must be strictly increasing".into(),
            ));
        }
        Ok(Self(v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    /// Position of `i` within the set.
    pub fn position(&self, i: usize) -> Option<usize> {
        self.0.binary_search(&i).ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }

    pub fn union(&self, other: &IndexSet) -> IndexSet {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        IndexSet::from_unsorted(v)
    }

    pub fn difference(&self, other: &IndexSet) -> IndexSet {
        IndexSet(self.iter().filter(|&i| !other.contains(i)).collect())
    }

    pub fn is_subset(&self, other: &IndexSet) -> bool {
        self.iter().all(|i| other.contains(i))
    }

    /// Every index below `dim`.
    pub fn check_bounds(&self, dim: usize) -> Result<()> {
        match self.0.last() {
            Some(&last) if last >= dim => Err(Error::InvalidArgument(format!(
                "index {last} out of range for dimension {dim}"
            ))),
            _ => Ok(()),
        }
    }
}

impl FromIterator<usize> for IndexSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        IndexSet::from_unsorted(iter.into_iter().collect())
    }
}

/// Sorted set of `(row, col)` pairs closed under transposition.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PairSet(Vec<(usize, usize)>);

impl PairSet {
    pub fn new() -> Self {
        Self(Vec::new())
    }

    /// Adds the transpose of every pair, then sorts and deduplicates.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut v = Vec::new();
        for (i, j) in pairs {
            v.push((i, j));
            if i != j {
                v.push((j, i));
            }
        }
        v.sort_unstable();
        v.dedup();
        Self(v)
    }

    /// Builds from upper-triangle pairs `(i, j)` with `i <= j`.
    pub fn from_upper(upper: &[(usize, usize)]) -> Self {
        Self::from_pairs(upper.iter().copied())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.0.binary_search(&(i, j)).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.0.iter().copied()
    }

    /// Pairs with `i <= j`.
    pub fn upper(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.iter().filter(|(i, j)| i <= j)
    }

    /// Column indices paired with row `i`, sorted.
    pub fn row(&self, i: usize) -> &[(usize, usize)] {
        let start = self.0.partition_point(|&(r, _)| r < i);
        let end = self.0.partition_point(|&(r, _)| r <= i);
        &self.0[start..end]
    }

    pub fn as_slice(&self) -> &[(usize, usize)] {
        &self.0
    }

    pub fn union(&self, other: &PairSet) -> PairSet {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        v.sort_unstable();
        v.dedup();
        PairSet(v)
    }

    pub fn is_subset(&self, other: &PairSet) -> bool {
        self.iter().all(|(i, j)| other.contains(i, j))
    }

    pub fn is_symmetric(&self) -> bool {
        self.iter().all(|(i, j)| self.contains(j, i))
    }
}
