//! Seeded inputs shared by the benchmarks.

use num_bigint::BigInt;
use prime_points::IntMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn random_square(n: usize, range: i64, seed: u64) -> IntMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    IntMatrix::from_fn(n, n, |_, _| BigInt::from(rng.gen_range(-range..=range)))
}

/// Antisymmetric matrix of even order `2 * half`.
pub fn random_antisymmetric(half: usize, range: i64, seed: u64) -> IntMatrix {
    let order = 2 * half;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let upper: Vec<BigInt> =
        (0..order * (order - 1) / 2).map(|_| BigInt::from(rng.gen_range(-range..=range))).collect();
    IntMatrix::antisymmetric_from_upper(order, &upper).expect("valid order")
}
