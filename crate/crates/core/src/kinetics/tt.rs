//! Gain and loss operators for kernels in tensor-train format.
//!
//! Gain: every core fiber `H[a, :, b]` is weighted by `n`, zero-padded and
//! transformed. For each frequency the spectra form a chain of
//! `R_{λ-1} x R_λ` matrices whose product (a `1 x 1` scalar, evaluated left
//! to right as a row vector) is the spectrum of the total-size sequence.
//! One inverse transform then yields every `p_k`.
//!
//! Loss: the first `d - 1` cores are contracted with `n` to a row vector over
//! `r_{d-1}`, which is applied to the last core. Kernel symmetry lets the
//! last mode play the role of the size `k`.

use realfft::num_complex::Complex;

use super::fft::{PaddedTransform, Spectrum, BIN_CHUNK};
use super::{check_order, check_size, factorial};
use crate::error::Result;
use crate::parallel::ExecutionPlan;
use crate::tensor::TTKernel;

pub fn rhs_tt_p(kernel: &TTKernel, n: &[f64], plan: &ExecutionPlan) -> Result<Vec<f64>> {
    check_size(kernel.mode_size(), n)?;
    let d = check_order(kernel.dim())?;
    let partition = plan.partition(n.len())?;
    let transform = PaddedTransform::new(plan, d, n.len());
    let cores = kernel.cores();

    // (core, a, b) in core order, a-major; `base[λ]` is the first fiber of core λ.
    let mut fibers = Vec::with_capacity(kernel.fiber_count());
    let mut base = Vec::with_capacity(d);
    for (lambda, core) in cores.iter().enumerate() {
        base.push(fibers.len());
        for a in 0..core.left_rank() {
            for b in 0..core.right_rank() {
                fibers.push((lambda, a, b));
            }
        }
    }

    let spectra: Vec<Spectrum> = plan.map(plan.parallel_fibers, fibers.len(), |f| {
        let (lambda, a, b) = fibers[f];
        transform.weighted_spectrum(plan, &partition, cores[lambda].fiber(a, b), n)
    });

    let max_rank = kernel.max_rank();
    let mut total = vec![Complex::new(0.0, 0.0); transform.bins()];
    plan.for_each_chunk_mut(plan.parallel_fibers, &mut total, BIN_CHUNK, |c, chunk| {
        let mut row = vec![Complex::new(0.0, 0.0); max_rank];
        let mut next = vec![Complex::new(0.0, 0.0); max_rank];
        for (j, out) in chunk.iter_mut().enumerate() {
            let bin = c * BIN_CHUNK + j;
            let first = cores[0].right_rank();
            for (b, slot) in row[..first].iter_mut().enumerate() {
                *slot = spectra[base[0] + b][bin];
            }
            for (lambda, core) in cores.iter().enumerate().skip(1) {
                let (left, right) = (core.left_rank(), core.right_rank());
                next[..right].fill(Complex::new(0.0, 0.0));
                for (a, &ra) in row[..left].iter().enumerate() {
                    let start = base[lambda] + a * right;
                    for (b, slot) in next[..right].iter_mut().enumerate() {
                        *slot += ra * spectra[start + b][bin];
                    }
                }
                std::mem::swap(&mut row, &mut next);
            }
            *out = row[0];
        }
    });
    drop(spectra);

    Ok(transform.finish_gain(plan, &partition, total, d, factorial(d)))
}

pub fn rhs_tt_q(kernel: &TTKernel, n: &[f64], plan: &ExecutionPlan) -> Result<Vec<f64>> {
    check_size(kernel.mode_size(), n)?;
    let d = check_order(kernel.dim())?;
    let partition = plan.partition(n.len())?;
    let (last, leading) = kernel.cores().split_last().expect("d >= 2");

    let mut row = vec![1.0];
    for core in leading {
        let mut next = vec![0.0; core.right_rank()];
        for (a, &ra) in row.iter().enumerate() {
            for (b, slot) in next.iter_mut().enumerate() {
                let fiber = core.fiber(a, b);
                *slot += ra * plan.sum_over_sizes(&partition, |k| fiber[k - 1] * n[k - 1]);
            }
        }
        row = next;
    }

    let scale = -1.0 / factorial(d - 1);
    let mut q = vec![0.0; n.len()];
    plan.for_each_chunk_mut(plan.parallel_blocks, &mut q, partition.block_size(), |p, chunk| {
        let offset = p * chunk.len();
        for (j, slot) in chunk.iter_mut().enumerate() {
            let i = offset + j;
            let contracted: f64 = row.iter().enumerate().map(|(r, w)| w * last.fiber(r, 0)[i]).sum();
            *slot = scale * n[i] * contracted;
        }
    });
    Ok(q)
}
