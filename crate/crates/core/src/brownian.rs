//! Generalized Brownian kernels and their exact low-rank representations.
//!
//! The kernel element is the permutation-symmetrized power product
//!
//! ```text
//! C[i_1, ..., i_D] = Σ_σ  i_σ(1)^μ_1 · i_σ(2)^μ_2 · ... · i_σ(D)^μ_D
//! ```
//!
//! [`build_brownian_tt`] assembles a tensor train with ranks `binomial(D, λ)`
//! by labelling the rank index at level `λ` with a `λ`-subset of exponents
//! (see [`SubsetCodec`]). Core `λ` connects subset `A` to subset `B` iff
//! `B = A ∪ {s}`, in which case the fiber is `i ↦ i^μ_s`.

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::subset::{binomial, SubsetCodec};
use crate::tensor::{size_power, CPKernel, MultiIndex, TTCore, TTKernel};

/// Largest `D` for which the `D!` permutation sum is enumerated.
pub const PERMUTATION_GUARD: usize = 8;

/// Exponent vector `(μ_1, ..., μ_D)` of a generalized Brownian kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct BrownianSpec {
    exponents: Vec<f64>,
}

impl BrownianSpec {
    pub fn new(exponents: Vec<f64>) -> Result<Self> {
        if exponents.len() < 2 {
            return Err(Error::invalid(format!(
                "a Brownian kernel needs at least 2 exponents, got {}",
                exponents.len()
            )));
        }
        if exponents.iter().any(|m| !m.is_finite()) {
            return Err(Error::invalid("Brownian exponents must be finite"));
        }
        Ok(BrownianSpec { exponents })
    }

    pub fn dim(&self) -> usize {
        self.exponents.len()
    }

    pub fn exponents(&self) -> &[f64] {
        &self.exponents
    }
}

impl TryFrom<Vec<f64>> for BrownianSpec {
    type Error = Error;

    fn try_from(value: Vec<f64>) -> Result<Self> {
        BrownianSpec::new(value)
    }
}

impl From<BrownianSpec> for Vec<f64> {
    fn from(spec: BrownianSpec) -> Self {
        spec.exponents
    }
}

/// `Σ_σ Π_λ idx[σ(λ)]^mu[λ]` by literal enumeration. Works for any length `>= 1`,
/// including the one-dimensional base case `i^μ`.
pub fn permutation_sum(mu: &[f64], idx: &[usize]) -> f64 {
    debug_assert_eq!(mu.len(), idx.len());
    (0..idx.len())
        .permutations(idx.len())
        .map(|sigma| {
            sigma
                .iter()
                .zip(mu)
                .map(|(&s, &m)| size_power(idx[s], m))
                .product::<f64>()
        })
        .sum()
}

pub fn brownian_element(spec: &BrownianSpec, idx: &MultiIndex) -> Result<f64> {
    if idx.len() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            actual: idx.len(),
        });
    }
    if spec.dim() > PERMUTATION_GUARD {
        return Err(Error::PermutationGuard {
            dim: spec.dim(),
            limit: PERMUTATION_GUARD,
        });
    }
    Ok(permutation_sum(spec.exponents(), idx.entries()))
}

/// Exact TT representation with ranks `R_λ = binomial(D, λ)`.
pub fn build_brownian_tt(spec: &BrownianSpec, n: usize) -> Result<TTKernel> {
    if n == 0 {
        return Err(Error::invalid("mode size must be positive"));
    }
    let dim = spec.dim();
    let powers: Vec<Vec<f64>> = spec
        .exponents()
        .iter()
        .map(|&m| (1..=n).map(|k| size_power(k, m)).collect())
        .collect();

    let codecs: Vec<SubsetCodec> = (0..=dim).map(|level| SubsetCodec::new(dim, level)).collect();
    let mut cores = Vec::with_capacity(dim);
    for level in 1..=dim {
        let (prev, next) = (&codecs[level - 1], &codecs[level]);
        let mut core = TTCore::zeros(prev.len(), n, next.len());
        let mut smaller = Vec::with_capacity(level);
        for b in 0..next.len() {
            let superset = next.decode(b);
            for (pos, &s) in superset.iter().enumerate() {
                smaller.clear();
                smaller.extend_from_slice(&superset[..pos]);
                smaller.extend_from_slice(&superset[pos + 1..]);
                let a = prev
                    .encode(&smaller)
                    .expect("subset with one element removed is a valid (λ-1)-subset");
                core.fiber_mut(a, b).copy_from_slice(&powers[s - 1]);
            }
        }
        cores.push(core);
    }
    TTKernel::new(cores)
}

/// Exact CP representation with one rank-one term per permutation (`R = D!`).
pub fn brownian_cp(spec: &BrownianSpec, n: usize) -> Result<CPKernel> {
    if spec.dim() > PERMUTATION_GUARD {
        return Err(Error::PermutationGuard {
            dim: spec.dim(),
            limit: PERMUTATION_GUARD,
        });
    }
    let dim = spec.dim();
    // Term σ contributes Π_λ i_σ(λ)^μ_λ, so mode σ(λ) carries exponent μ_λ.
    let mut mode_exponent: Vec<Vec<f64>> = Vec::new();
    for sigma in (0..dim).permutations(dim) {
        let mut per_mode = vec![0.0; dim];
        for (lambda, &mode) in sigma.iter().enumerate() {
            per_mode[mode] = spec.exponents()[lambda];
        }
        mode_exponent.push(per_mode);
    }
    let rank = mode_exponent.len();
    CPKernel::from_fn(dim, n, rank, |mode, k, r| size_power(k, mode_exponent[r][mode]))
}

/// `binomial(D, ceil(D / 2))`, the largest TT rank of the Brownian construction.
pub fn tt_max_rank_bound(dim: usize) -> usize {
    binomial(dim, dim.div_ceil(2))
}
