//! Brute-force `O(N^d)` operators over a dense kernel.

use super::{check_order, check_size, factorial};
use crate::error::Result;
use crate::tensor::{for_each_index, DenseKernel};

/// `p_k = 1/d! Σ_{|i| = k} C_i n_{i_1} ... n_{i_d}` for `k = 1..=N`.
pub fn rhs_dense_p(kernel: &DenseKernel, n: &[f64]) -> Result<Vec<f64>> {
    check_size(kernel.mode_size(), n)?;
    let d = check_order(kernel.dim())?;
    let size = n.len();
    let values = kernel.values();
    let mut p = vec![0.0; size];
    let mut offset = 0;
    for_each_index(d, size, |idx| {
        let total: usize = idx.iter().sum();
        if total <= size {
            let prod: f64 = idx.iter().map(|&i| n[i - 1]).product();
            p[total - 1] += values[offset] * prod;
        }
        offset += 1;
    });
    let scale = 1.0 / factorial(d);
    p.iter_mut().for_each(|v| *v *= scale);
    Ok(p)
}

/// `q_k = -n_k/(d-1)! Σ_{i ∈ [1,N]^{d-1}} C_{i,k} n_{i_1} ... n_{i_{d-1}}`.
pub fn rhs_dense_q(kernel: &DenseKernel, n: &[f64]) -> Result<Vec<f64>> {
    check_size(kernel.mode_size(), n)?;
    let d = check_order(kernel.dim())?;
    let size = n.len();
    let values = kernel.values();
    let mut acc = vec![0.0; size];
    let mut offset = 0;
    for_each_index(d, size, |idx| {
        let (last, rest) = idx.split_last().expect("d >= 2");
        let prod: f64 = rest.iter().map(|&i| n[i - 1]).product();
        acc[last - 1] += values[offset] * prod;
        offset += 1;
    });
    let scale = 1.0 / factorial(d - 1);
    Ok(acc.iter().zip(n).map(|(a, nk)| -nk * a * scale).collect())
}
