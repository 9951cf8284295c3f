#![allow(dead_code)]

use multikin_core::{CPKernel, TTCore, TTKernel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_state(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(0.0..1.0)).collect()
}

pub fn random_mu(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.gen_range(-1.0..=1.0)).collect()
}

pub fn random_tt(rng: &mut ChaCha8Rng, n: usize, ranks: &[usize]) -> TTKernel {
    let cores = ranks
        .windows(2)
        .map(|w| {
            let values: Vec<f64> = (0..w[0] * n * w[1]).map(|_| rng.gen_range(0.0..1.0)).collect();
            TTCore::from_fn(w[0], n, w[1], |a, k, b| values[(a * w[1] + b) * n + k - 1])
        })
        .collect::<Vec<_>>();
    TTKernel::new(cores).unwrap()
}

pub fn random_cp(rng: &mut ChaCha8Rng, d: usize, n: usize, rank: usize) -> CPKernel {
    let factors = (0..d)
        .map(|_| (0..n * rank).map(|_| rng.gen_range(0.0..1.0)).collect())
        .collect();
    CPKernel::new(n, rank, factors).unwrap()
}

/// `||a - b||_inf / ||b||_inf`.
pub fn rel_inf(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let diff = a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

pub fn rel(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        (a - b).abs() / b.abs()
    }
}

fn factorial(d: usize) -> f64 {
    (1..=d).product::<usize>() as f64
}

/// Visits `[1, n]^d` by recursion; independent of the library's odometer.
pub fn visit(d: usize, n: usize, prefix: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
    if prefix.len() == d {
        f(prefix);
        return;
    }
    for i in 1..=n {
        prefix.push(i);
        visit(d, n, prefix, f);
        prefix.pop();
    }
}

/// Gain by literal summation over an element function.
pub fn brute_gain(d: usize, n: &[f64], element: &dyn Fn(&[usize]) -> f64) -> Vec<f64> {
    let size = n.len();
    let mut p = vec![0.0; size];
    visit(d, size, &mut Vec::new(), &mut |idx| {
        let k: usize = idx.iter().sum();
        if k <= size {
            p[k - 1] += element(idx) * idx.iter().map(|&i| n[i - 1]).product::<f64>();
        }
    });
    p.iter().map(|v| v / factorial(d)).collect()
}

/// Loss by literal summation over an element function.
pub fn brute_loss(d: usize, n: &[f64], element: &dyn Fn(&[usize]) -> f64) -> Vec<f64> {
    let size = n.len();
    (1..=size)
        .map(|k| {
            let mut acc = 0.0;
            visit(d - 1, size, &mut Vec::new(), &mut |idx| {
                let mut full = idx.to_vec();
                full.push(k);
                acc += element(&full) * idx.iter().map(|&i| n[i - 1]).product::<f64>();
            });
            -n[k - 1] * acc / factorial(d - 1)
        })
        .collect()
}

/// Full expansion of a TT kernel by successive outer contraction, as a map
/// from row-major offset to value.
pub fn expand_tt(tt: &TTKernel) -> Vec<f64> {
    let n = tt.mode_size();
    // partial[(prefix offset) * R + r]
    let mut partial = vec![1.0];
    let mut width = 1;
    for core in tt.cores() {
        let (left, _, right) = core.shape();
        assert_eq!(left, width);
        let prefixes = partial.len() / width;
        let mut next = vec![0.0; prefixes * n * right];
        for pre in 0..prefixes {
            for i in 1..=n {
                for b in 0..right {
                    let mut s = 0.0;
                    for a in 0..left {
                        s += partial[pre * width + a] * core.get(a, i, b);
                    }
                    next[(pre * n + i - 1) * right + b] = s;
                }
            }
        }
        partial = next;
        width = right;
    }
    partial
}

pub fn offset(idx: &[usize], n: usize) -> usize {
    idx.iter().fold(0, |acc, &i| acc * n + i - 1)
}
