//! Fixtures shared by the criterion benches.

use multikin_core::{build_brownian_tt, BrownianSpec, TTKernel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Exponents of the ternary Brownian reference kernel.
pub const TERNARY_MU: [f64; 3] = [1.0 / 3.0, -1.0 / 3.0, 0.0];

pub fn random_state(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(0.0..1.0)).collect()
}

pub fn ternary_brownian(n: usize) -> TTKernel {
    build_brownian_tt(&BrownianSpec::new(TERNARY_MU.to_vec()).expect("three exponents"), n).expect("valid size")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_reproducible() {
        assert_eq!(random_state(64, 1), random_state(64, 1));
        assert_ne!(random_state(64, 1), random_state(64, 2));
        assert_eq!(ternary_brownian(8).ranks(), vec![1, 3, 3, 1]);
    }
}
