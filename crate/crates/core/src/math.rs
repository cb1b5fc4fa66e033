//! Float helpers routed through `libm` so results do not depend on the
//! platform's math library.

pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

pub fn exp2(x: f64) -> f64 {
    libm::exp2(x)
}

pub fn log2(x: f64) -> f64 {
    libm::log2(x)
}

pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

/// Round half away from zero; for the non-negative arguments used here this
/// is round-half-up.
pub fn round(x: f64) -> f64 {
    libm::round(x)
}

/// Arithmetic mean computed as `x0 + mean(x - x0)`, which is exact for
/// constant input.
pub fn mean(xs: &[f64]) -> f64 {
    debug_assert!(!xs.is_empty());
    let x0 = xs[0];
    let shift: f64 = xs.iter().map(|x| x - x0).sum();
    x0 + shift / xs.len() as f64
}

/// Sample (n - 1) variance. Zero for constant input.
pub fn sample_variance(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64
}

pub fn sample_sd(xs: &[f64]) -> f64 {
    sqrt(sample_variance(xs))
}

/// Median of the given values; `None` when empty.
pub fn median(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[mid]
    } else {
        v[mid - 1] + (v[mid] - v[mid - 1]) / 2.0
    })
}

/// Pearson correlation; 0 when either side is constant.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let ma = mean(a);
    let mb = mean(b);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let dx = x - ma;
        let dy = y - mb;
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return 0.0;
    }
    (sab / sqrt(saa * sbb)).clamp(-1.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_exact_for_constants() {
        let xs = [0.7; 7];
        assert_eq!(mean(&xs), 0.7);
        assert_eq!(sample_variance(&xs), 0.0);
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&[5.0, 1.0, 3.0]), Some(3.0));
        assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]), Some(2.5));
        assert_eq!(median(&[]), None);
    }

    #[test]
    fn round_is_half_up_for_positive() {
        assert_eq!(round(18.8), 19.0);
        assert_eq!(round(2.5), 3.0);
        assert_eq!(round(2.4999), 2.0);
    }
}
