//! Synthetic regression problems for benchmarks and smoke tests.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use treetune_core::{rng, Dataset, Matrix};

/// Friedman #1: `10 sin(pi x1 x2) + 20 (x3 - 0.5)^2 + 10 x4 + 5 x5 + e` with
/// `x ~ U(0, 1)^p` and `e ~ N(0, noise_sd^2)`. Columns past the fifth are
/// noise. Requires `p >= 5`.
pub fn friedman1(n: usize, p: usize, noise_sd: f64, seed: u64) -> Dataset {
    assert!(p >= 5, "friedman1 needs at least 5 features");
    let mut r = rng::stream(seed, 0);
    let noise = Normal::new(0.0, noise_sd).expect("finite sd");
    let mut x = Vec::with_capacity(n * p);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let row: Vec<f64> = (0..p).map(|_| r.gen::<f64>()).collect();
        let f = 10.0 * (std::f64::consts::PI * row[0] * row[1]).sin()
            + 20.0 * (row[2] - 0.5).powi(2)
            + 10.0 * row[3]
            + 5.0 * row[4];
        y.push(f + noise.sample(&mut r));
        x.extend(row);
    }
    Dataset::from_parts("friedman1", Matrix::new(n, p, x), y).expect("n >= 2 and p >= 1")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_and_determinism() {
        let a = friedman1(50, 10, 1.0, 3);
        assert_eq!((a.n(), a.p()), (50, 10));
        assert_eq!(a, friedman1(50, 10, 1.0, 3));
        assert_ne!(a.response(), friedman1(50, 10, 1.0, 4).response());
    }

    #[test]
    fn noiseless_values() {
        let d = friedman1(20, 5, 0.0, 1);
        for i in 0..20 {
            let x = d.features().row(i);
            let f = 10.0 * (std::f64::consts::PI * x[0] * x[1]).sin() + 20.0 * (x[2] - 0.5) * (x[2] - 0.5) + 10.0 * x[3] + 5.0 * x[4];
            assert!((d.response()[i] - f).abs() < 1e-12);
        }
    }
}
