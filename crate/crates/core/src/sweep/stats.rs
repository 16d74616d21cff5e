//! Binomial and sample-mean confidence intervals.

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959964;

/// Wilson score interval for `k` successes in `n` trials; `(0, 1)` when `n == 0`.
pub fn wilson(k: usize, n: usize, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n_f = n as f64;
    let phat = k as f64 / n_f;
    let z2 = z * z;
    let denom = 1.0 + z2 / n_f;
    let center = (phat + z2 / (2.0 * n_f)) / denom;
    let half = z * (phat * (1.0 - phat) / n_f + z2 / (4.0 * n_f * n_f)).sqrt() / denom;
    let lo = if k == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if k == n { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

/// Half of the Wilson interval width at 95%.
pub fn wilson_half_width(k: usize, n: usize) -> f64 {
    let (lo, hi) = wilson(k, n, Z95);
    (hi - lo) / 2.0
}

/// Normal-approximation 95% half-width of a sample mean.
pub fn mean_half_width(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    Z95 * (var / n as f64).sqrt()
}
