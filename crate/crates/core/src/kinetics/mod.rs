//! Right-hand side of the multi-particle aggregation system.
//!
//! For every collision order `d` the gain `P^(d)` and loss `Q^(d)` operators
//! are available over a dense kernel (brute force, the verification oracle),
//! a TT kernel and a CP kernel. Sums are truncated to sizes `1..=N`: gain
//! keeps total sizes `|i| <= N`, loss runs over `[1, N]^{d-1}`.

mod cp;
mod dense;
mod fft;
mod tt;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::parallel::ExecutionPlan;
use crate::tensor::{CPKernel, DenseKernel, TTKernel};

pub use cp::{rhs_cp_p, rhs_cp_q};
pub use dense::{rhs_dense_p, rhs_dense_q};
pub use tt::{rhs_tt_p, rhs_tt_q};

pub(crate) fn factorial(d: usize) -> f64 {
    (1..=d).map(|k| k as f64).product()
}

pub(crate) fn check_size(kernel_n: usize, n: &[f64]) -> Result<()> {
    if kernel_n != n.len() {
        return Err(Error::SizeMismatch {
            kernel: kernel_n,
            state: n.len(),
        });
    }
    Ok(())
}

pub(crate) fn check_order(d: usize) -> Result<usize> {
    if d < 2 {
        return Err(Error::invalid(format!("collision order must be at least 2, got {d}")));
    }
    Ok(d)
}

/// Concentrations `n_k` for sizes `k = 1..=N` at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationState {
    n: Vec<f64>,
    t: f64,
}

impl ConcentrationState {
    pub fn new(n: Vec<f64>, t: f64) -> Result<Self> {
        if n.len() < 2 {
            return Err(Error::invalid(format!("need at least 2 size classes, got {}", n.len())));
        }
        if !t.is_finite() || n.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("concentrations and time must be finite"));
        }
        Ok(ConcentrationState { n, t })
    }

    /// All mass in size 1 with concentration `c0`.
    pub fn monodisperse(size_classes: usize, c0: f64, t: f64) -> Result<Self> {
        let mut n = vec![0.0; size_classes];
        if let Some(first) = n.first_mut() {
            *first = c0;
        }
        ConcentrationState::new(n, t)
    }

    pub fn values(&self) -> &[f64] {
        &self.n
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn size_classes(&self) -> usize {
        self.n.len()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.n
    }
}

/// One kernel representation for a single collision order.
#[derive(Debug, Clone, PartialEq)]
pub enum Kernel {
    Tt(TTKernel),
    Cp(CPKernel),
    Dense(DenseKernel),
}

impl Kernel {
    pub fn order(&self) -> usize {
        match self {
            Kernel::Tt(k) => k.dim(),
            Kernel::Cp(k) => k.dim(),
            Kernel::Dense(k) => k.dim(),
        }
    }

    pub fn mode_size(&self) -> usize {
        match self {
            Kernel::Tt(k) => k.mode_size(),
            Kernel::Cp(k) => k.mode_size(),
            Kernel::Dense(k) => k.mode_size(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Kernel::Tt(_) => "tt",
            Kernel::Cp(_) => "cp",
            Kernel::Dense(_) => "dense",
        }
    }

    /// Rough flop count of one gain plus loss evaluation.
    pub fn estimated_cost(&self) -> f64 {
        let (d, n) = (self.order() as f64, self.mode_size() as f64);
        let len = (self.order() * self.mode_size() + 1).next_power_of_two() as f64;
        let transform = len * len.log2();
        match self {
            Kernel::Dense(_) => 2.0 * n.powf(d),
            Kernel::Tt(k) => {
                let fibers = k.fiber_count() as f64;
                (fibers + 1.0) * transform + 4.0 * len * fibers
            }
            Kernel::Cp(k) => {
                let terms = d * k.rank() as f64;
                (terms + 1.0) * transform + 4.0 * len * terms
            }
        }
    }

    pub fn element(&self, idx: &[usize]) -> f64 {
        match self {
            Kernel::Tt(k) => k.element_unchecked(idx),
            Kernel::Cp(k) => k.element_unchecked(idx),
            Kernel::Dense(k) => k.values()[k.offset(idx)],
        }
    }

    pub fn gain(&self, n: &[f64], plan: &ExecutionPlan) -> Result<Vec<f64>> {
        match self {
            Kernel::Tt(k) => rhs_tt_p(k, n, plan),
            Kernel::Cp(k) => rhs_cp_p(k, n, plan),
            Kernel::Dense(k) => rhs_dense_p(k, n),
        }
    }

    pub fn loss(&self, n: &[f64], plan: &ExecutionPlan) -> Result<Vec<f64>> {
        match self {
            Kernel::Tt(k) => rhs_tt_q(k, n, plan),
            Kernel::Cp(k) => rhs_cp_q(k, n, plan),
            Kernel::Dense(k) => rhs_dense_q(k, n),
        }
    }
}

impl From<TTKernel> for Kernel {
    fn from(k: TTKernel) -> Self {
        Kernel::Tt(k)
    }
}

impl From<CPKernel> for Kernel {
    fn from(k: CPKernel) -> Self {
        Kernel::Cp(k)
    }
}

impl From<DenseKernel> for Kernel {
    fn from(k: DenseKernel) -> Self {
        Kernel::Dense(k)
    }
}

/// Largest relative asymmetry `|C_i - C_σ(i)| / max(|C_i|, |C_σ(i)|)` over
/// `samples` random indices and random permutations.
///
/// The loss operators treat the last mode as the size index, which is only
/// valid for symmetric kernels; this is the check for user-supplied kernels.
pub fn symmetry_violation(kernel: &Kernel, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (d, n) = (kernel.order(), kernel.mode_size());
    let mut worst: f64 = 0.0;
    let mut idx = vec![0; d];
    for _ in 0..samples {
        for slot in idx.iter_mut() {
            *slot = rng.gen_range(1..=n);
        }
        let mut permuted = idx.clone();
        for i in (1..d).rev() {
            permuted.swap(i, rng.gen_range(0..=i));
        }
        let (a, b) = (kernel.element(&idx), kernel.element(&permuted));
        let scale = a.abs().max(b.abs());
        if scale > 0.0 {
            worst = worst.max((a - b).abs() / scale);
        }
    }
    worst
}

/// Kernels per collision order, all sharing the same `N`.
#[derive(Debug, Clone, Default)]
pub struct KernelSet {
    n: Option<usize>,
    orders: BTreeMap<usize, Vec<Kernel>>,
}

impl KernelSet {
    pub fn new() -> Self {
        KernelSet::default()
    }

    /// Adds a representation; several may coexist for one order.
    pub fn insert(&mut self, kernel: impl Into<Kernel>) -> Result<()> {
        let kernel = kernel.into();
        check_order(kernel.order())?;
        match self.n {
            Some(n) if n != kernel.mode_size() => {
                return Err(Error::SizeMismatch {
                    kernel: kernel.mode_size(),
                    state: n,
                })
            }
            _ => self.n = Some(kernel.mode_size()),
        }
        self.orders.entry(kernel.order()).or_default().push(kernel);
        Ok(())
    }

    pub fn with(mut self, kernel: impl Into<Kernel>) -> Result<Self> {
        self.insert(kernel)?;
        Ok(self)
    }

    pub fn mode_size(&self) -> Option<usize> {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.orders.is_empty()
    }

    pub fn orders(&self) -> impl Iterator<Item = usize> + '_ {
        self.orders.keys().copied()
    }

    pub fn representations(&self, order: usize) -> &[Kernel] {
        self.orders.get(&order).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Cheapest representation for `order`.
    pub fn select(&self, order: usize) -> Option<&Kernel> {
        self.representations(order)
            .iter()
            .min_by(|a, b| a.estimated_cost().total_cmp(&b.estimated_cost()))
    }
}

/// Gain, loss and total right-hand side.
#[derive(Debug, Clone, PartialEq)]
pub struct RhsResult {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    /// `s = p + q`.
    pub s: Vec<f64>,
    /// `(p^(d), q^(d))` per order, when requested.
    pub per_order: Option<BTreeMap<usize, (Vec<f64>, Vec<f64>)>>,
}

/// `Σ_d (P^(d)[n] + Q^(d)[n])`, each order on its cheapest representation.
pub fn rhs_total(kernels: &KernelSet, n: &[f64], plan: &ExecutionPlan, breakdown: bool) -> Result<RhsResult> {
    if kernels.is_empty() {
        return Err(Error::NoCollisionOrders);
    }
    let size = n.len();
    let mut p = vec![0.0; size];
    let mut q = vec![0.0; size];
    let mut per_order = breakdown.then(BTreeMap::new);
    for order in kernels.orders() {
        let kernel = kernels.select(order).expect("orders are never empty");
        let gain = kernel.gain(n, plan)?;
        let loss = kernel.loss(n, plan)?;
        p.iter_mut().zip(&gain).for_each(|(a, g)| *a += g);
        q.iter_mut().zip(&loss).for_each(|(a, l)| *a += l);
        if let Some(map) = per_order.as_mut() {
            map.insert(order, (gain, loss));
        }
    }
    let s = p.iter().zip(&q).map(|(a, b)| a + b).collect();
    Ok(RhsResult { p, q, s, per_order })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brownian::{build_brownian_tt, BrownianSpec};
    use crate::tensor::DEFAULT_DENSE_BUDGET;

    fn unit(size: usize) -> Vec<f64> {
        let mut n = vec![0.0; size];
        n[0] = 1.0;
        n
    }

    fn dense_const(d: usize, size: usize, c: f64) -> DenseKernel {
        DenseKernel::from_fn(d, size, DEFAULT_DENSE_BUDGET, |_| c).unwrap()
    }

    #[test]
    fn dense_unit_examples() {
        let p = rhs_dense_p(&dense_const(2, 6, 1.0), &unit(6)).unwrap();
        assert_eq!(p, vec![0.0, 0.5, 0.0, 0.0, 0.0, 0.0]);
        let q = rhs_dense_q(&dense_const(2, 6, 1.0), &unit(6)).unwrap();
        assert_eq!(q, vec![-1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);

        let p3 = rhs_dense_p(&dense_const(3, 6, 1.0), &unit(6)).unwrap();
        assert!((p3[2] - 1.0 / 6.0).abs() < 1e-16);
        assert!(p3.iter().enumerate().all(|(k, v)| k == 2 || *v == 0.0));
        let q3 = rhs_dense_q(&dense_const(3, 6, 1.0), &unit(6)).unwrap();
        assert_eq!(q3[0], -0.5);
        assert!(q3[1..].iter().all(|v| *v == 0.0));
    }

    #[test]
    fn fast_unit_examples() {
        let plan = ExecutionPlan::serial();
        for d in [2, 3] {
            let tt = TTKernel::constant(d, 8, 1.0).unwrap();
            let cp = CPKernel::constant(d, 8, 1.0).unwrap();
            let dense = dense_const(d, 8, 1.0);
            let want_p = rhs_dense_p(&dense, &unit(8)).unwrap();
            let want_q = rhs_dense_q(&dense, &unit(8)).unwrap();
            for (got_p, got_q) in [
                (rhs_tt_p(&tt, &unit(8), &plan).unwrap(), rhs_tt_q(&tt, &unit(8), &plan).unwrap()),
                (rhs_cp_p(&cp, &unit(8), &plan).unwrap(), rhs_cp_q(&cp, &unit(8), &plan).unwrap()),
            ] {
                for k in 0..8 {
                    assert!((got_p[k] - want_p[k]).abs() < 1e-15, "d={d} k={k}");
                    assert!((got_q[k] - want_q[k]).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn zero_state_gives_zero() {
        let plan = ExecutionPlan::serial();
        let tt = build_brownian_tt(&BrownianSpec::new(vec![0.3, -0.3, 0.0]).unwrap(), 8).unwrap();
        let zero = vec![0.0; 8];
        assert!(rhs_tt_p(&tt, &zero, &plan).unwrap().iter().all(|v| *v == 0.0));
        assert!(rhs_tt_q(&tt, &zero, &plan).unwrap().iter().all(|v| *v == 0.0));
        let cp = CPKernel::constant(3, 8, 2.0).unwrap();
        assert!(rhs_cp_p(&cp, &zero, &plan).unwrap().iter().all(|v| *v == 0.0));
        assert!(rhs_cp_q(&cp, &zero, &plan).unwrap().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn constant_loss_is_moment_power() {
        let plan = ExecutionPlan::serial();
        let n: Vec<f64> = (1..=8).map(|k| 1.0 / k as f64).collect();
        let m0: f64 = n.iter().sum();
        let c = 1.7;
        for d in [2, 3, 4] {
            let q = rhs_tt_q(&TTKernel::constant(d, 8, c).unwrap(), &n, &plan).unwrap();
            let qc = rhs_cp_q(&CPKernel::constant(d, 8, c).unwrap(), &n, &plan).unwrap();
            for k in 0..8 {
                let want = -c * n[k] * m0.powi(d as i32 - 1) / factorial(d - 1);
                assert!((q[k] - want).abs() < 1e-14 * want.abs());
                assert!((qc[k] - want).abs() < 1e-14 * want.abs());
            }
        }
    }

    #[test]
    fn size_mismatch_is_reported() {
        let plan = ExecutionPlan::serial();
        let tt = TTKernel::constant(2, 8, 1.0).unwrap();
        assert!(matches!(
            rhs_tt_p(&tt, &[1.0; 4], &plan),
            Err(Error::SizeMismatch { kernel: 8, state: 4 })
        ));
        assert!(rhs_dense_q(&dense_const(2, 4, 1.0), &[1.0; 5]).is_err());
        let mut set = KernelSet::new();
        set.insert(tt).unwrap();
        assert!(set.insert(TTKernel::constant(3, 4, 1.0).unwrap()).is_err());
    }

    #[test]
    fn total_examples() {
        let plan = ExecutionPlan::serial();
        let set = KernelSet::new().with(TTKernel::constant(2, 4, 1.0).unwrap()).unwrap();
        let r = rhs_total(&set, &unit(4), &plan, true).unwrap();
        let want = [-1.0, 0.5, 0.0, 0.0];
        for k in 0..4 {
            assert!((r.s[k] - want[k]).abs() < 1e-15);
            assert_eq!(r.s[k], r.p[k] + r.q[k]);
        }
        assert_eq!(r.per_order.unwrap().len(), 1);

        let err = rhs_total(&KernelSet::new(), &unit(4), &plan, false).unwrap_err();
        assert_eq!(err.to_string(), "no collision orders configured");
    }

    #[test]
    fn dispatch_prefers_cheapest() {
        let spec = BrownianSpec::new(vec![0.2, -0.2, 0.0]).unwrap();
        let tt = build_brownian_tt(&spec, 32).unwrap();
        let dense = tt.to_dense(DEFAULT_DENSE_BUDGET).unwrap();
        let set = KernelSet::new().with(dense).unwrap().with(tt).unwrap();
        assert_eq!(set.select(3).unwrap().name(), "tt");
        let small = KernelSet::new().with(dense_const(2, 4, 1.0)).unwrap();
        assert_eq!(small.select(2).unwrap().name(), "dense");
    }

    #[test]
    fn symmetry_check_flags_asymmetric_kernels() {
        let spec = BrownianSpec::new(vec![0.9, -0.4, 0.1]).unwrap();
        let tt: Kernel = build_brownian_tt(&spec, 6).unwrap().into();
        assert!(symmetry_violation(&tt, 200, 1) < 1e-13);
        let skew = DenseKernel::from_fn(2, 6, DEFAULT_DENSE_BUDGET, |i| i[0] as f64).unwrap();
        assert!(symmetry_violation(&Kernel::Dense(skew), 200, 1) > 0.1);
    }

    #[test]
    fn gain_vanishes_below_order() {
        let plan = ExecutionPlan::serial();
        let n: Vec<f64> = (1..=16).map(|k| (k as f64).sin().abs()).collect();
        for d in [2, 3, 4] {
            let tt = TTKernel::constant(d, 16, 1.0).unwrap();
            let p = rhs_tt_p(&tt, &n, &plan).unwrap();
            assert!(p[..d - 1].iter().all(|v| *v == 0.0));
        }
    }
}
