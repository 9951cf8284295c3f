//! Gain and loss operators for kernels in canonical polyadic format.
//!
//! Each rank-one term is a plain `d`-fold convolution, so spectra are
//! multiplied elementwise per term and summed over terms before a single
//! inverse transform.

use realfft::num_complex::Complex;

use super::fft::{PaddedTransform, Spectrum, BIN_CHUNK};
use super::{check_order, check_size, factorial};
use crate::error::Result;
use crate::parallel::ExecutionPlan;
use crate::tensor::CPKernel;

pub fn rhs_cp_p(kernel: &CPKernel, n: &[f64], plan: &ExecutionPlan) -> Result<Vec<f64>> {
    check_size(kernel.mode_size(), n)?;
    let d = check_order(kernel.dim())?;
    let partition = plan.partition(n.len())?;
    let transform = PaddedTransform::new(plan, d, n.len());
    let rank = kernel.rank();

    // spectra[r * d + λ]
    let spectra: Vec<Spectrum> = plan.map(plan.parallel_fibers, rank * d, |f| {
        let (r, lambda) = (f / d, f % d);
        transform.weighted_spectrum(plan, &partition, kernel.column(lambda, r), n)
    });

    let mut total = vec![Complex::new(0.0, 0.0); transform.bins()];
    plan.for_each_chunk_mut(plan.parallel_fibers, &mut total, BIN_CHUNK, |c, chunk| {
        for (j, out) in chunk.iter_mut().enumerate() {
            let bin = c * BIN_CHUNK + j;
            *out = (0..rank)
                .map(|r| {
                    spectra[r * d..(r + 1) * d]
                        .iter()
                        .fold(Complex::new(1.0, 0.0), |acc, s| acc * s[bin])
                })
                .sum();
        }
    });
    drop(spectra);

    Ok(transform.finish_gain(plan, &partition, total, d, factorial(d)))
}

pub fn rhs_cp_q(kernel: &CPKernel, n: &[f64], plan: &ExecutionPlan) -> Result<Vec<f64>> {
    check_size(kernel.mode_size(), n)?;
    let d = check_order(kernel.dim())?;
    let partition = plan.partition(n.len())?;

    let weights: Vec<f64> = (0..kernel.rank())
        .map(|r| {
            (0..d - 1)
                .map(|lambda| {
                    let column = kernel.column(lambda, r);
                    plan.sum_over_sizes(&partition, |k| column[k - 1] * n[k - 1])
                })
                .product()
        })
        .collect();

    let scale = -1.0 / factorial(d - 1);
    let mut q = vec![0.0; n.len()];
    plan.for_each_chunk_mut(plan.parallel_blocks, &mut q, partition.block_size(), |p, chunk| {
        let offset = p * chunk.len();
        for (j, slot) in chunk.iter_mut().enumerate() {
            let i = offset + j;
            let contracted: f64 = weights
                .iter()
                .enumerate()
                .map(|(r, w)| w * kernel.column(d - 1, r)[i])
                .sum();
            *slot = scale * n[i] * contracted;
        }
    });
    Ok(q)
}
