//! Seeded, portable random streams.
//!
//! Every random decision in the crate draws from a ChaCha8 stream derived
//! from a user seed and a stream index, so work items (trees, trials, folds)
//! are independent of scheduling order.

use alloc::vec::Vec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Stream indices reserved for specific consumers of a top-level seed.
pub mod streams {
    pub const SPLIT: u64 = 0x0053_504c_4954;
    pub const FOLDS: u64 = 0x0046_4f4c_4453;
    pub const FIT: u64 = 0x0046_4954;
    pub const SAMPLE: u64 = 0x5341_4d50;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Child seed for `(seed, index)`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index.wrapping_add(0x632b_e59b_d9b4_e019)))
}

pub fn stream(seed: u64, index: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, index))
}

/// Uniform index in `0..n`. Draws through `u64` so the sequence does not
/// depend on pointer width.
pub fn below<R: Rng>(rng: &mut R, n: usize) -> usize {
    debug_assert!(n > 0);
    rng.gen_range(0..n as u64) as usize
}

/// Uniform real in `[0, 1)`.
pub fn unit<R: Rng>(rng: &mut R) -> f64 {
    rng.gen::<f64>()
}

/// Uniform real in `[lo, hi]` (the upper endpoint is reachable only up to
/// rounding).
pub fn uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * unit(rng)
}

/// Uniform real in `(0, hi]`.
pub fn uniform_open_low<R: Rng>(rng: &mut R, hi: f64) -> f64 {
    hi * (1.0 - unit(rng))
}

pub fn shuffle<R: Rng, T>(rng: &mut R, xs: &mut [T]) {
    for i in (1..xs.len()).rev() {
        let j = below(rng, i + 1);
        xs.swap(i, j);
    }
}

/// `k` distinct indices from `0..n`, in draw order.
pub fn sample_without_replacement<R: Rng>(rng: &mut R, n: usize, k: usize) -> Vec<usize> {
    let k = k.min(n);
    let mut pool: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = i + below(rng, n - i);
        pool.swap(i, j);
    }
    pool.truncate(k);
    pool
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = (0..4).map(|_| 0).scan(stream(7, 1), |r, _| Some(r.gen())).collect();
        let b: Vec<u64> = (0..4).map(|_| 0).scan(stream(7, 1), |r, _| Some(r.gen())).collect();
        let c: Vec<u64> = (0..4).map(|_| 0).scan(stream(7, 2), |r, _| Some(r.gen())).collect();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn sample_without_replacement_is_distinct() {
        let mut rng = stream(1, 0);
        let mut s = sample_without_replacement(&mut rng, 20, 20);
        s.sort_unstable();
        assert_eq!(s, (0..20).collect::<Vec<_>>());
    }

    #[test]
    fn open_low_never_zero() {
        let mut rng = stream(3, 0);
        for _ in 0..10_000 {
            let v = uniform_open_low(&mut rng, 1.0);
            assert!(v > 0.0 && v <= 1.0);
        }
    }
}
