//! Enumeration of the `λ`-element subsets of `{1, ..., D}` used to label TT ranks.

use itertools::Itertools;

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, j| acc * (n - j) / (j + 1))
}

/// Bijection between rank indices `0..binomial(D, λ)` and increasing `λ`-subsets
/// of `{1, ..., D}`, in colexicographic order.
///
/// Colex rank of `s_1 < ... < s_λ` is `Σ_j binomial(s_j - 1, j)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsetCodec {
    dim: usize,
    level: usize,
    subsets: Vec<Vec<usize>>,
}

impl SubsetCodec {
    pub fn new(dim: usize, level: usize) -> Self {
        assert!(level <= dim, "subset level {level} exceeds dimension {dim}");
        let mut subsets: Vec<Vec<usize>> = (1..=dim).combinations(level).collect();
        subsets.sort_by(|a, b| a.iter().rev().cmp(b.iter().rev()));
        SubsetCodec { dim, level, subsets }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn len(&self) -> usize {
        self.subsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsets.is_empty()
    }

    /// Subset labelled by a 0-based rank index, elements increasing.
    pub fn decode(&self, rank: usize) -> &[usize] {
        &self.subsets[rank]
    }

    /// Inverse of [`decode`](Self::decode); `None` unless `subset` is a strictly
    /// increasing `λ`-subset of `{1, ..., D}`.
    pub fn encode(&self, subset: &[usize]) -> Option<usize> {
        if subset.len() != self.level
            || subset.iter().any(|&s| s == 0 || s > self.dim)
            || subset.windows(2).any(|w| w[0] >= w[1])
        {
            return None;
        }
        Some(
            subset
                .iter()
                .enumerate()
                .map(|(j, &s)| binomial(s - 1, j + 1))
                .sum(),
        )
    }

    pub fn iter(&self) -> impl Iterator<Item = &[usize]> {
        self.subsets.iter().map(Vec::as_slice)
    }
}
