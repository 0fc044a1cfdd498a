use serde::{Deserialize, Serialize};

/// Sorted, duplicate-free set of 0-based indices.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IndexSet(Vec<usize>);

impl IndexSet {
    pub fn new() -> Self {
        Self(Vec::new())
    }

    pub fn range(lo: usize, hi: usize) -> Self {
        Self((lo..hi).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, n: usize) -> bool {
        self.0.binary_search(&n).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn first(&self) -> Option<usize> {
        self.0.first().copied()
    }

    pub fn last(&self) -> Option<usize> {
        self.0.last().copied()
    }

    pub fn union(&self, other: &IndexSet) -> IndexSet {
        self.iter().chain(other.iter()).collect()
    }

    pub fn intersection(&self, other: &IndexSet) -> IndexSet {
        self.iter().filter(|&n| other.contains(n)).collect()
    }

    pub fn difference(&self, other: &IndexSet) -> IndexSet {
        self.iter().filter(|&n| !other.contains(n)).collect()
    }

    pub fn symmetric_difference(&self, other: &IndexSet) -> IndexSet {
        self.difference(other).union(&other.difference(self))
    }

    pub fn is_disjoint(&self, other: &IndexSet) -> bool {
        self.iter().all(|n| !other.contains(n))
    }

    pub fn is_subset(&self, other: &IndexSet) -> bool {
        self.iter().all(|n| other.contains(n))
    }

    /// Complement inside `0..dim`.
    pub fn complement(&self, dim: usize) -> IndexSet {
        (0..dim).filter(|&n| !self.contains(n)).collect()
    }

    pub fn max_index(&self) -> Option<usize> {
        self.last()
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }
}

impl FromIterator<usize> for IndexSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut v: Vec<usize> = iter.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Self(v)
    }
}

impl From<Vec<usize>> for IndexSet {
    fn from(v: Vec<usize>) -> Self {
        v.into_iter().collect()
    }
}

impl<const N: usize> From<[usize; N]> for IndexSet {
    fn from(v: [usize; N]) -> Self {
        v.into_iter().collect()
    }
}

/// All subsets of `items`, in binary-counter order (bit i selects items[i]).
pub fn subsets(items: &[usize]) -> impl Iterator<Item = IndexSet> + '_ {
    let n = items.len();
    assert!(n < 31, "subset enumeration limited to 30 items");
    (0u32..(1u32 << n)).map(move |mask| (0..n).filter(|i| mask & (1 << i) != 0).map(|i| items[i]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_ops() {
        let a = IndexSet::from([3, 1, 1, 2]);
        let b = IndexSet::from([2, 5]);
        assert_eq!(a.as_slice(), &[1, 2, 3]);
        assert_eq!(a.union(&b).as_slice(), &[1, 2, 3, 5]);
        assert_eq!(a.intersection(&b).as_slice(), &[2]);
        assert_eq!(a.symmetric_difference(&b).as_slice(), &[1, 3, 5]);
        assert_eq!(b.complement(4).as_slice(), &[0, 1, 3]);
        assert_eq!(subsets(&[4, 7]).count(), 4);
    }
}
