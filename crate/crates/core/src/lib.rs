//! Multi-particle aggregation kinetics with low-rank kernel acceleration.
//!
//! The system evolved here is
//!
//! ```text
//! dn_k/dt = Σ_{d=2}^{D} ( p_k^(d)[n] + q_k^(d)[n] ),
//! p_k^(d) =  1/d!     Σ_{|i|=k}        C^(d)_i       n_{i_1} ... n_{i_d}
//! q_k^(d) = -n_k/(d-1)! Σ_{i ∈ N^{d-1}} C^(d)_{i,k}  n_{i_1} ... n_{i_{d-1}}
//! ```
//!
//! truncated to sizes `1..=N`. Direct evaluation costs `O(N^d)`; with the
//! kernel in tensor-train form the gain becomes a chain of FFT convolutions
//! costing `O(N d R^2 log N)`, and `O(N d R log N)` in CP form.
//!
//! - [`tensor`]: TT, CP and dense kernel containers.
//! - [`brownian`]: generalized Brownian kernels and their exact TT/CP builders.
//! - [`kinetics`]: gain/loss operators and [`rhs_total`].
//! - [`integrator`]: midpoint RK2 stepping and moment series.
//! - [`parallel`]: block partition, worker plan and the scaling harness.

pub mod brownian;
pub mod config;
pub mod error;
pub mod integrator;
pub mod kernel_spec;
pub mod kinetics;
pub mod parallel;
pub mod subset;
pub mod tensor;

pub use brownian::{brownian_cp, brownian_element, build_brownian_tt, tt_max_rank_bound, BrownianSpec};
pub use config::{ExecutionSettings, InitialCondition, Representation, SimulationConfig};
pub use error::{Error, Result};
pub use integrator::{
    integrate, integrate_with, moments, rk2_step, IntegrationFailure, KernelRhs, MomentRecord, MomentSeries,
    RightHandSide, TimeGrid, Trajectory,
};
pub use kernel_spec::{dense_from_spec, KernelSpec, TableFormat};
pub use kinetics::{
    rhs_cp_p, rhs_cp_q, rhs_dense_p, rhs_dense_q, rhs_total, rhs_tt_p, rhs_tt_q, symmetry_violation,
    ConcentrationState, Kernel, KernelSet, RhsResult,
};
pub use parallel::{
    block_core, make_partition, run_scaling_benchmark, ExecutionPlan, FftLengthPolicy, PartitionPlan,
    ScalingConfig, ScalingReport,
};
pub use subset::{binomial, SubsetCodec};
pub use tensor::{CPKernel, DenseKernel, MultiIndex, TTCore, TTKernel, DEFAULT_DENSE_BUDGET};
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
