//! Block decomposition of the size coordinate and the shared-memory worker plan.
//!
//! Sizes `1..=N` are split into `P` equal blocks; block `p` (1-based) owns
//! sizes `(p-1)N/P + 1 ..= pN/P`. Weighting of core fibers by the
//! concentrations and assembly of the output vectors run block-by-block.
//! Fiber transforms and per-frequency rank chains are independent tasks and
//! run on the same pool.

mod bench;

use std::collections::HashMap;
use std::ops::RangeInclusive;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{TTCore, TTKernel};

pub use bench::{run_scaling_benchmark, ScalingConfig, ScalingReport};

/// Fixed chunk length for order-independent reductions.
pub const REDUCTION_CHUNK: usize = 4096;

/// Equal-block partition of sizes `1..=N` over `P` workers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PartitionPlan {
    n: usize,
    workers: usize,
}

pub fn make_partition(n: usize, workers: usize) -> Result<PartitionPlan> {
    if workers == 0 {
        return Err(Error::invalid("worker count must be at least 1"));
    }
    if n == 0 || n % workers != 0 {
        return Err(Error::Partition { n, workers });
    }
    Ok(PartitionPlan { n, workers })
}

impl PartitionPlan {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    pub fn block_size(&self) -> usize {
        self.n / self.workers
    }

    /// Sizes owned by block `p`, `1 <= p <= P`.
    pub fn block_range(&self, p: usize) -> RangeInclusive<usize> {
        assert!((1..=self.workers).contains(&p), "block {p} out of 1..={}", self.workers);
        let m = self.block_size();
        (p - 1) * m + 1..=p * m
    }

    pub fn blocks(&self) -> impl Iterator<Item = RangeInclusive<usize>> + '_ {
        (1..=self.workers).map(|p| self.block_range(p))
    }

    /// `{a}_p`, the slice of a size-indexed vector owned by block `p`.
    pub fn block<'a, T>(&self, v: &'a [T], p: usize) -> &'a [T] {
        let r = self.block_range(p);
        &v[r.start() - 1..*r.end()]
    }

    pub fn scatter<T: Clone>(&self, v: &[T]) -> Vec<Vec<T>> {
        assert_eq!(v.len(), self.n);
        v.chunks(self.block_size()).map(<[T]>::to_vec).collect()
    }

    pub fn gather<T: Clone>(&self, blocks: &[Vec<T>]) -> Vec<T> {
        assert_eq!(blocks.len(), self.workers);
        blocks.concat()
    }
}

/// `ℋ^(λ,p)`: the slab of core `λ` (1-based) owned by block `p` (1-based),
/// with shape `(R_{λ-1}, N/P, R_λ)`. Local size `j` maps to global size
/// `(p-1)N/P + j`.
pub fn block_core(kernel: &TTKernel, lambda: usize, p: usize, partition: &PartitionPlan) -> Result<TTCore> {
    if lambda == 0 || lambda > kernel.dim() {
        return Err(Error::invalid(format!("core {lambda} out of 1..={}", kernel.dim())));
    }
    if p == 0 || p > partition.workers() {
        return Err(Error::invalid(format!("block {p} out of 1..={}", partition.workers())));
    }
    if partition.n() != kernel.mode_size() {
        return Err(Error::SizeMismatch {
            kernel: kernel.mode_size(),
            state: partition.n(),
        });
    }
    let core = &kernel.cores()[lambda - 1];
    let offset = partition.block_range(p).start() - 1;
    Ok(TTCore::from_fn(
        core.left_rank(),
        partition.block_size(),
        core.right_rank(),
        |a, j, b| core.get(a, offset + j, b),
    ))
}

/// How the zero-padded transform length is chosen from the minimum length `dN + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FftLengthPolicy {
    /// Smallest power of two.
    #[default]
    PowerOfTwo,
    /// Smallest even number whose only prime factors are 2, 3 and 5.
    Smooth,
}

impl FftLengthPolicy {
    pub fn length(self, min_len: usize) -> usize {
        match self {
            FftLengthPolicy::PowerOfTwo => min_len.next_power_of_two(),
            FftLengthPolicy::Smooth => (min_len.max(2)..)
                .find(|&m| m % 2 == 0 && is_5_smooth(m))
                .expect("smooth numbers are unbounded"),
        }
    }
}

fn is_5_smooth(mut m: usize) -> bool {
    for f in [2, 3, 5] {
        while m % f == 0 {
            m /= f;
        }
    }
    m == 1
}

type RealPair = (Arc<dyn RealToComplex<f64>>, Arc<dyn ComplexToReal<f64>>);

#[derive(Default)]
struct FftCache {
    planner: RealFftPlanner<f64>,
    plans: HashMap<usize, RealPair>,
}

/// Worker pool and evaluation policy shared by the right-hand-side operators.
///
/// Cloning is cheap; clones share the pool and the transform plans.
#[derive(Clone)]
pub struct ExecutionPlan {
    workers: usize,
    pool: Option<Arc<rayon::ThreadPool>>,
    fft_cache: Arc<Mutex<FftCache>>,
    pub fft_length: FftLengthPolicy,
    /// Run fiber transforms and frequency chains as pool tasks.
    pub parallel_fibers: bool,
    /// Run weighting and output assembly block-by-block on the pool.
    pub parallel_blocks: bool,
    /// Reduce in fixed-size chunks so results do not depend on the worker count.
    pub deterministic: bool,
}

impl std::fmt::Debug for ExecutionPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExecutionPlan")
            .field("workers", &self.workers)
            .field("fft_length", &self.fft_length)
            .field("parallel_fibers", &self.parallel_fibers)
            .field("parallel_blocks", &self.parallel_blocks)
            .field("deterministic", &self.deterministic)
            .finish()
    }
}

impl ExecutionPlan {
    pub fn new(workers: usize) -> Result<Self> {
        if workers == 0 {
            return Err(Error::invalid("worker count must be at least 1"));
        }
        let pool = if workers > 1 {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .thread_name(|i| format!("multikin-{i}"))
                .build()
                .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?;
            Some(Arc::new(pool))
        } else {
            None
        };
        Ok(ExecutionPlan {
            workers,
            pool,
            fft_cache: Arc::default(),
            fft_length: FftLengthPolicy::default(),
            parallel_fibers: true,
            parallel_blocks: true,
            deterministic: true,
        })
    }

    pub fn serial() -> Self {
        ExecutionPlan::new(1).expect("one worker is always valid")
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    pub fn partition(&self, n: usize) -> Result<PartitionPlan> {
        make_partition(n, self.workers)
    }

    pub(crate) fn real_fft(&self, len: usize) -> RealPair {
        let mut cache = self.fft_cache.lock().expect("fft cache poisoned");
        let FftCache { planner, plans } = &mut *cache;
        plans
            .entry(len)
            .or_insert_with(|| (planner.plan_fft_forward(len), planner.plan_fft_inverse(len)))
            .clone()
    }

    /// `(0..count).map(f)`, on the pool when `parallel` allows it. Output order is fixed.
    pub(crate) fn map<T, F>(&self, parallel: bool, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match (&self.pool, parallel) {
            (Some(pool), true) => pool.install(|| (0..count).into_par_iter().map(f).collect()),
            _ => (0..count).map(f).collect(),
        }
    }

    /// Runs `f(chunk_index, chunk)` over `data.chunks_mut(chunk)`.
    pub(crate) fn for_each_chunk_mut<T, F>(&self, parallel: bool, data: &mut [T], chunk: usize, f: F)
    where
        T: Send,
        F: Fn(usize, &mut [T]) + Sync + Send,
    {
        match (&self.pool, parallel) {
            (Some(pool), true) => pool.install(|| {
                data.par_chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c));
            }),
            _ => data.chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c)),
        }
    }

    /// Sum of `term(k)` over sizes `k = 1..=n`.
    ///
    /// Deterministic mode sums fixed chunks of [`REDUCTION_CHUNK`] and then
    /// the partials in order; otherwise one partial per partition block.
    pub(crate) fn sum_over_sizes<F>(&self, partition: &PartitionPlan, term: F) -> f64
    where
        F: Fn(usize) -> f64 + Sync + Send,
    {
        let n = partition.n();
        let partials = if self.deterministic {
            let chunks = n.div_ceil(REDUCTION_CHUNK);
            self.map(self.parallel_blocks, chunks, |c| {
                let lo = c * REDUCTION_CHUNK + 1;
                let hi = ((c + 1) * REDUCTION_CHUNK).min(n);
                (lo..=hi).map(&term).sum::<f64>()
            })
        } else {
            self.map(self.parallel_blocks, partition.workers(), |p| {
                partition.block_range(p + 1).map(&term).sum::<f64>()
            })
        };
        partials.into_iter().sum()
    }
}
