//! Seeded, platform-independent sampling helpers.
//!
//! Every randomised routine in this crate (instance builders, batched identity
//! checks, property-style tests) draws from a [`ChaCha8Rng`] seeded through
//! [`seeded_rng`]. ChaCha8 is a counter-based stream cipher RNG: its output is
//! identical on every platform and Rust release for a given seed, which is what
//! makes trace files byte-reproducible.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
pub use rand_chacha::ChaCha8Rng;

/// Creates the crate's standard generator from a 64-bit seed.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Samples a vector with i.i.d. entries uniform on `[lo, hi)`.
pub fn uniform_vector(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.random_range(lo..hi))
}

/// Samples a matrix with i.i.d. entries uniform on `[lo, hi)`.
///
/// Entries are generated in row-major order so that the stream of draws matches
/// the row-by-row layout used in written-out instances.
pub fn uniform_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, lo: f64, hi: f64) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = rng.random_range(lo..hi);
        }
    }
    m
}
