//! Kernel containers: tensor train, canonical polyadic and the dense oracle.
//!
//! Particle sizes are 1-based everywhere in this API. A fiber slice returned
//! by [`TTCore::fiber`] or [`CPKernel::column`] holds size `k` at offset `k - 1`.

use crate::error::{Error, Result};

/// Element budget for dense kernels, `2^26` doubles (512 MiB).
pub const DEFAULT_DENSE_BUDGET: u128 = 1 << 26;

/// `i^mu` for a particle size `i >= 1`, evaluated as `exp(mu * ln i)`.
#[inline]
pub fn size_power(i: usize, mu: f64) -> f64 {
    (mu * (i as f64).ln()).exp()
}

/// A tuple of particle sizes `(i_1, ..., i_D)`, each at least 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(entries: Vec<usize>) -> Result<Self> {
        if let Some(&bad) = entries.iter().find(|&&i| i == 0) {
            return Err(Error::IndexOutOfRange { index: bad, n: 0 });
        }
        Ok(MultiIndex(entries))
    }

    pub fn entries(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Total size `|i| = i_1 + ... + i_D`.
    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    fn check(&self, dim: usize, n: usize) -> Result<()> {
        if self.0.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: self.0.len(),
            });
        }
        match self.0.iter().find(|&&i| i > n) {
            Some(&index) => Err(Error::IndexOutOfRange { index, n }),
            None => Ok(()),
        }
    }
}

impl TryFrom<&[usize]> for MultiIndex {
    type Error = Error;

    fn try_from(value: &[usize]) -> Result<Self> {
        MultiIndex::new(value.to_vec())
    }
}

/// Visits every multi-index in `[1, n]^dim` in row-major order (last entry fastest).
pub(crate) fn for_each_index(dim: usize, n: usize, mut f: impl FnMut(&[usize])) {
    if n == 0 {
        return;
    }
    let mut idx = vec![1usize; dim];
    loop {
        f(&idx);
        let mut pos = dim;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            if idx[pos] < n {
                idx[pos] += 1;
                break;
            }
            idx[pos] = 1;
        }
    }
}

fn checked_volume(dim: usize, n: usize, budget: u128) -> Result<usize> {
    let elements = (n as u128).checked_pow(dim as u32).unwrap_or(u128::MAX);
    if elements > budget {
        return Err(Error::BudgetExceeded { elements, budget });
    }
    Ok(elements as usize)
}

/// One three-way TT core of shape `(left, n, right)`.
///
/// Storage is fiber-major: the `n` values for a fixed rank pair `(a, b)` are
/// contiguous, which is the access pattern of the FFT-based evaluators.
#[derive(Debug, Clone, PartialEq)]
pub struct TTCore {
    left: usize,
    n: usize,
    right: usize,
    data: Vec<f64>,
}

impl TTCore {
    pub fn zeros(left: usize, n: usize, right: usize) -> Self {
        TTCore {
            left,
            n,
            right,
            data: vec![0.0; left * n * right],
        }
    }

    /// Builds a core from a function of `(a, size, b)` with 0-based ranks and 1-based size.
    pub fn from_fn(left: usize, n: usize, right: usize, f: impl Fn(usize, usize, usize) -> f64) -> Self {
        let mut core = TTCore::zeros(left, n, right);
        for a in 0..left {
            for b in 0..right {
                for (k, v) in core.fiber_mut(a, b).iter_mut().enumerate() {
                    *v = f(a, k + 1, b);
                }
            }
        }
        core
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.left, self.n, self.right)
    }

    pub fn left_rank(&self) -> usize {
        self.left
    }

    pub fn right_rank(&self) -> usize {
        self.right
    }

    pub fn mode_size(&self) -> usize {
        self.n
    }

    pub fn get(&self, a: usize, size: usize, b: usize) -> f64 {
        self.fiber(a, b)[size - 1]
    }

    pub fn set(&mut self, a: usize, size: usize, b: usize, value: f64) {
        self.fiber_mut(a, b)[size - 1] = value;
    }

    pub fn fiber(&self, a: usize, b: usize) -> &[f64] {
        let start = (a * self.right + b) * self.n;
        &self.data[start..start + self.n]
    }

    pub fn fiber_mut(&mut self, a: usize, b: usize) -> &mut [f64] {
        let start = (a * self.right + b) * self.n;
        &mut self.data[start..start + self.n]
    }

    /// The `left x right` matrix `H[:, size, :]`, row-major.
    pub fn slice(&self, size: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.left * self.right);
        for a in 0..self.left {
            for b in 0..self.right {
                out.push(self.get(a, size, b));
            }
        }
        out
    }
}

/// A `D`-way kernel in tensor-train format.
#[derive(Debug, Clone, PartialEq)]
pub struct TTKernel {
    n: usize,
    cores: Vec<TTCore>,
}

impl TTKernel {
    pub fn new(cores: Vec<TTCore>) -> Result<Self> {
        let first = cores
            .first()
            .ok_or_else(|| Error::invalid("a TT kernel needs at least one core"))?;
        let n = first.n;
        if n == 0 {
            return Err(Error::invalid("mode size must be positive"));
        }
        if first.left != 1 {
            return Err(Error::invalid("first TT rank R_0 must be 1"));
        }
        if cores.last().map(|c| c.right) != Some(1) {
            return Err(Error::invalid("last TT rank R_D must be 1"));
        }
        for (lambda, pair) in cores.windows(2).enumerate() {
            if pair[0].right != pair[1].left {
                return Err(Error::invalid(format!(
                    "rank mismatch between cores {} and {}: {} vs {}",
                    lambda + 1,
                    lambda + 2,
                    pair[0].right,
                    pair[1].left
                )));
            }
        }
        if let Some(c) = cores.iter().find(|c| c.n != n) {
            return Err(Error::SizeMismatch { kernel: n, state: c.n });
        }
        Ok(TTKernel { n, cores })
    }

    /// Rank-one kernel with every element equal to `c`.
    pub fn constant(dim: usize, n: usize, c: f64) -> Result<Self> {
        let cores = (0..dim)
            .map(|lambda| TTCore::from_fn(1, n, 1, |_, _, _| if lambda == 0 { c } else { 1.0 }))
            .collect();
        TTKernel::new(cores)
    }

    pub fn dim(&self) -> usize {
        self.cores.len()
    }

    pub fn mode_size(&self) -> usize {
        self.n
    }

    pub fn cores(&self) -> &[TTCore] {
        &self.cores
    }

    pub fn cores_mut(&mut self) -> &mut [TTCore] {
        &mut self.cores
    }

    /// `(R_0, R_1, ..., R_D)`.
    pub fn ranks(&self) -> Vec<usize> {
        std::iter::once(1)
            .chain(self.cores.iter().map(|c| c.right))
            .collect()
    }

    pub fn max_rank(&self) -> usize {
        self.ranks().into_iter().max().unwrap_or(1)
    }

    /// Number of `(r_{λ-1}, r_λ)` fibers over all cores.
    pub fn fiber_count(&self) -> usize {
        self.cores.iter().map(|c| c.left * c.right).sum()
    }

    /// Element via the chained product of core slices.
    pub fn element(&self, idx: &MultiIndex) -> Result<f64> {
        idx.check(self.dim(), self.n)?;
        Ok(self.element_unchecked(idx.entries()))
    }

    pub(crate) fn element_unchecked(&self, idx: &[usize]) -> f64 {
        let mut row = vec![1.0];
        for (core, &i) in self.cores.iter().zip(idx) {
            let mut next = vec![0.0; core.right];
            for (a, &ra) in row.iter().enumerate() {
                if ra == 0.0 {
                    continue;
                }
                for (b, nb) in next.iter_mut().enumerate() {
                    *nb += ra * core.get(a, i, b);
                }
            }
            row = next;
        }
        row[0]
    }

    pub fn to_dense(&self, budget: u128) -> Result<DenseKernel> {
        DenseKernel::from_fn(self.dim(), self.n, budget, |idx| self.element_unchecked(idx))
    }
}

/// A `D`-way kernel as a sum of `R` rank-one terms.
#[derive(Debug, Clone, PartialEq)]
pub struct CPKernel {
    n: usize,
    rank: usize,
    // factors[λ][r * n + (size - 1)]
    factors: Vec<Vec<f64>>,
}

impl CPKernel {
    /// Factors are given column-major: `factors[λ][r * n + (k - 1)] = F^(λ)[k, r]`.
    pub fn new(n: usize, rank: usize, factors: Vec<Vec<f64>>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::invalid("a CP kernel needs at least one factor"));
        }
        if n == 0 || rank == 0 {
            return Err(Error::invalid("CP mode size and rank must be positive"));
        }
        for f in &factors {
            if f.len() != n * rank {
                return Err(Error::DimensionMismatch {
                    expected: n * rank,
                    actual: f.len(),
                });
            }
        }
        Ok(CPKernel { n, rank, factors })
    }

    pub fn from_fn(dim: usize, n: usize, rank: usize, f: impl Fn(usize, usize, usize) -> f64) -> Result<Self> {
        let factors = (0..dim)
            .map(|lambda| {
                let mut m = vec![0.0; n * rank];
                for r in 0..rank {
                    for k in 1..=n {
                        m[r * n + k - 1] = f(lambda, k, r);
                    }
                }
                m
            })
            .collect();
        CPKernel::new(n, rank, factors)
    }

    pub fn constant(dim: usize, n: usize, c: f64) -> Result<Self> {
        CPKernel::from_fn(dim, n, 1, |lambda, _, _| if lambda == 0 { c } else { 1.0 })
    }

    pub fn dim(&self) -> usize {
        self.factors.len()
    }

    pub fn mode_size(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Column `r` of factor `λ` (0-based mode), size `k` at offset `k - 1`.
    pub fn column(&self, lambda: usize, r: usize) -> &[f64] {
        &self.factors[lambda][r * self.n..(r + 1) * self.n]
    }

    pub fn factor(&self, lambda: usize, size: usize, r: usize) -> f64 {
        self.factors[lambda][r * self.n + size - 1]
    }

    pub fn element(&self, idx: &MultiIndex) -> Result<f64> {
        idx.check(self.dim(), self.n)?;
        Ok(self.element_unchecked(idx.entries()))
    }

    pub(crate) fn element_unchecked(&self, idx: &[usize]) -> f64 {
        (0..self.rank)
            .map(|r| {
                idx.iter()
                    .enumerate()
                    .map(|(lambda, &i)| self.factor(lambda, i, r))
                    .product::<f64>()
            })
            .sum()
    }

    pub fn to_dense(&self, budget: u128) -> Result<DenseKernel> {
        DenseKernel::from_fn(self.dim(), self.n, budget, |idx| self.element_unchecked(idx))
    }
}

/// Full `N^D` array, row-major with the first index slowest. Used as a verification oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseKernel {
    dim: usize,
    n: usize,
    values: Vec<f64>,
}

impl DenseKernel {
    pub fn from_fn(dim: usize, n: usize, budget: u128, f: impl Fn(&[usize]) -> f64) -> Result<Self> {
        if n == 0 || dim == 0 {
            return Err(Error::invalid("dense kernel needs positive D and N"));
        }
        let len = checked_volume(dim, n, budget)?;
        let mut values = Vec::with_capacity(len);
        for_each_index(dim, n, |idx| values.push(f(idx)));
        Ok(DenseKernel { dim, n, values })
    }

    pub fn from_values(dim: usize, n: usize, budget: u128, values: Vec<f64>) -> Result<Self> {
        let len = checked_volume(dim, n, budget)?;
        if values.len() != len {
            return Err(Error::DimensionMismatch {
                expected: len,
                actual: values.len(),
            });
        }
        Ok(DenseKernel { dim, n, values })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mode_size(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn offset(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.n + (i - 1))
    }

    pub fn element(&self, idx: &MultiIndex) -> Result<f64> {
        idx.check(self.dim, self.n)?;
        Ok(self.values[self.offset(idx.entries())])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(v: &[usize]) -> MultiIndex {
        MultiIndex::new(v.to_vec()).unwrap()
    }

    #[test]
    fn multi_index_rejects_zero() {
        assert!(MultiIndex::new(vec![1, 0, 2]).is_err());
        assert_eq!(mi(&[2, 3, 4]).total(), 9);
    }

    #[test]
    fn odometer_visits_row_major() {
        let mut seen = Vec::new();
        for_each_index(2, 2, |i| seen.push(i.to_vec()));
        assert_eq!(seen, vec![vec![1, 1], vec![1, 2], vec![2, 1], vec![2, 2]]);
    }

    #[test]
    fn rank_one_ones_is_one() {
        let tt = TTKernel::constant(3, 5, 1.0).unwrap();
        assert_eq!(tt.element(&mi(&[1, 4, 5])).unwrap(), 1.0);
        assert_eq!(tt.ranks(), vec![1, 1, 1, 1]);
    }

    #[test]
    fn tt_element_checks_range_and_dimension() {
        let tt = TTKernel::constant(2, 4, 1.0).unwrap();
        assert!(matches!(
            tt.element(&mi(&[1, 5])),
            Err(Error::IndexOutOfRange { index: 5, n: 4 })
        ));
        assert!(matches!(tt.element(&mi(&[1])), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn tt_rejects_bad_rank_chain() {
        let cores = vec![TTCore::zeros(1, 3, 2), TTCore::zeros(3, 3, 1)];
        assert!(TTKernel::new(cores).is_err());
        let cores = vec![TTCore::zeros(1, 3, 2), TTCore::zeros(2, 3, 2)];
        assert!(TTKernel::new(cores).is_err());
    }

    #[test]
    fn cp_constant() {
        let cp = CPKernel::constant(3, 4, 2.5).unwrap();
        for_each_index(3, 4, |idx| {
            assert_eq!(cp.element(&MultiIndex::new(idx.to_vec()).unwrap()).unwrap(), 2.5);
        });
        let ones = CPKernel::constant(2, 3, 1.0).unwrap();
        assert_eq!(ones.element(&mi(&[3, 2])).unwrap(), 1.0);
    }

    #[test]
    fn dense_budget_is_enforced() {
        let err = DenseKernel::from_fn(3, 8, 100, |_| 0.0).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { elements: 512, budget: 100 }));
    }

    #[test]
    fn core_slice_layout() {
        let core = TTCore::from_fn(2, 3, 2, |a, k, b| (100 * a + 10 * k + b) as f64);
        assert_eq!(core.slice(2), vec![20.0, 21.0, 120.0, 121.0]);
        assert_eq!(core.fiber(1, 0), &[110.0, 120.0, 130.0]);
    }
}
