//! Zero-padded real transforms shared by the TT and CP gain operators.
//!
//! A fiber `f` weighted by concentrations is laid out so that position `k`
//! holds `f[k] * n[k]` for sizes `k = 1..=N` and position 0 is zero. The
//! product of `d` such spectra is then the transform of the sequence indexed
//! by the total size `|i|`, which never exceeds `dN`, so a length `L > dN`
//! avoids circular aliasing.

use std::sync::Arc;

use realfft::num_complex::Complex;
use realfft::{ComplexToReal, RealToComplex};

use crate::parallel::{ExecutionPlan, PartitionPlan};

pub(crate) type Spectrum = Vec<Complex<f64>>;

/// Frequency bins per task in the chain phase.
pub(crate) const BIN_CHUNK: usize = 2048;

pub(crate) struct PaddedTransform {
    pub len: usize,
    pub forward: Arc<dyn RealToComplex<f64>>,
    pub inverse: Arc<dyn ComplexToReal<f64>>,
}

impl PaddedTransform {
    pub fn new(plan: &ExecutionPlan, order: usize, n: usize) -> Self {
        let len = plan.fft_length.length(order * n + 1);
        let (forward, inverse) = plan.real_fft(len);
        PaddedTransform { len, forward, inverse }
    }

    pub fn bins(&self) -> usize {
        self.len / 2 + 1
    }

    /// Spectrum of `k ↦ fiber[k-1] * n[k-1]`, weighted block by block.
    pub fn weighted_spectrum(
        &self,
        plan: &ExecutionPlan,
        partition: &PartitionPlan,
        fiber: &[f64],
        n: &[f64],
    ) -> Spectrum {
        let size = partition.n();
        let mut buf = vec![0.0; self.len];
        plan.for_each_chunk_mut(plan.parallel_blocks, &mut buf[1..=size], partition.block_size(), |p, chunk| {
            let offset = p * chunk.len();
            for (j, slot) in chunk.iter_mut().enumerate() {
                *slot = fiber[offset + j] * n[offset + j];
            }
        });
        let mut out = self.forward.make_output_vec();
        self.forward
            .process(&mut buf, &mut out)
            .expect("buffer lengths match the plan");
        out
    }

    /// Inverts the total-size spectrum and writes `p_k = y[k] / (L · scale)` for
    /// `k = order..=N`; smaller sizes are exactly zero.
    pub fn finish_gain(
        &self,
        plan: &ExecutionPlan,
        partition: &PartitionPlan,
        mut spectrum: Spectrum,
        order: usize,
        scale: f64,
    ) -> Vec<f64> {
        // DC and Nyquist bins of a real signal are real.
        spectrum[0].im = 0.0;
        if let Some(last) = spectrum.last_mut() {
            last.im = 0.0;
        }
        let mut time = self.inverse.make_output_vec();
        self.inverse
            .process(&mut spectrum, &mut time)
            .expect("buffer lengths match the plan");
        let norm = 1.0 / (self.len as f64 * scale);
        let mut p = vec![0.0; partition.n()];
        plan.for_each_chunk_mut(plan.parallel_blocks, &mut p, partition.block_size(), |b, chunk| {
            let offset = b * chunk.len();
            for (j, slot) in chunk.iter_mut().enumerate() {
                let k = offset + j + 1;
                *slot = if k >= order { time[k] * norm } else { 0.0 };
            }
        });
        p
    }
}
