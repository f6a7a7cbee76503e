//! Small statistics used by the Monte Carlo harnesses.

use statrs::distribution::{ContinuousCDF, Normal};

/// Two-sided 97.5% standard normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Unbiased sample variance (`n − 1` denominator).
pub fn sample_variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() as f64 - 1.0)
}

/// One-sample Kolmogorov–Smirnov statistic `sup |F_n − F|` against
/// `Normal(mu, sigma2)`. `None` when `sigma2 <= 0`.
pub fn ks_normal(x: &[f64], mu: f64, sigma2: f64) -> Option<f64> {
    if !(sigma2 > 0.0) || x.is_empty() {
        return None;
    }
    let normal = Normal::new(mu, sigma2.sqrt()).ok()?;
    Some(ks_statistic(x, |v| normal.cdf(v)))
}

/// KS statistic against a normal with mean and variance estimated from `x`
/// (Lilliefors setting; the usual KS null quantiles do not apply).
pub fn ks_normal_estimated(x: &[f64]) -> Option<f64> {
    if x.len() < 2 {
        return None;
    }
    ks_normal(x, mean(x), sample_variance(x))
}

pub fn ks_statistic<F: Fn(f64) -> f64>(x: &[f64], cdf: F) -> f64 {
    let mut s = x.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = cdf(v);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic p-value `P(√n·D > d)` of the Kolmogorov distribution.
pub fn ks_pvalue(d: f64, n: usize) -> f64 {
    let lambda = d * (n as f64).sqrt();
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Wilson score interval `(lo, hi)` for `k` successes out of `n`.
pub fn wilson(k: usize, n: usize, z: f64) -> (f64, f64) {
    let nf = n as f64;
    let p = k as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Least-squares slope of `ln p` against `n` over entries with `p > floor`;
/// `−∞` when fewer than two entries qualify.
pub fn log_slope(n: &[usize], p: &[f64], floor: f64) -> f64 {
    let pts: Vec<(f64, f64)> = n
        .iter()
        .zip(p)
        .filter(|(_, &p)| p > floor)
        .map(|(&n, &p)| (n as f64, p.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NEG_INFINITY;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
