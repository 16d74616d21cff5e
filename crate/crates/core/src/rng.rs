//! Counter-addressed random streams.
//!
//! Every realization owns a ChaCha8 keystream keyed by its 64-bit seed. Site
//! `i` of row `t` always reads keystream word pair `t * n_sites + i`, so the
//! value a cell sees never depends on scheduling or on how many realizations
//! run in parallel.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of realization `realization` at grid point `point` under `master`.
pub fn derive_seed(master: u64, point: u64, realization: u64) -> u64 {
    let a = mix64(master.wrapping_add(GOLDEN));
    let b = mix64(a ^ point.wrapping_add(GOLDEN).wrapping_mul(0xD6E8_FEB8_6659_FD93));
    mix64(b ^ realization.wrapping_add(GOLDEN).wrapping_mul(0xA076_1D64_78BD_642F))
}

/// Uniform double in `[0, 1)` from the top 53 bits.
#[inline]
pub fn unit_f64(x: u64) -> f64 {
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Keystream positioned at the first site of a given row.
pub fn row_stream(seed: u64, n_sites: usize, row: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // two 32-bit words per u64 draw
    rng.set_word_pos(2 * (row as u128) * (n_sites as u128));
    rng
}

/// Draws `u ~ U[0,1)` from any generator.
#[inline]
pub fn uniform<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    unit_f64(rng.next_u64())
}
