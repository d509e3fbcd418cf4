//! Small numerical helpers: standard normal functions, moments, Gaussian KDE
//! with Silverman's bandwidth and Kolmogorov-Smirnov distances.

use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::{Error, Result};

fn std_normal() -> Normal {
    Normal::standard()
}

/// Standard normal CDF `Phi`.
pub fn phi_cdf(t: f64) -> f64 {
    std_normal().cdf(t)
}

pub fn phi_pdf(t: f64) -> f64 {
    std_normal().pdf(t)
}

/// Standard normal quantile `Phi^{-1}(q)`.
pub fn phi_inv(q: f64) -> f64 {
    std_normal().inverse_cdf(q)
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance; `NaN` for fewer than two values.
pub fn variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return f64::NAN;
    }
    let mu = mean(xs);
    xs.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / (xs.len() - 1) as f64
}

/// `ceil(q * n)`-th order statistic (the same convention as the engine).
/// Reorders `xs`.
pub fn order_quantile(xs: &mut [f64], q: f64) -> f64 {
    let k = ((q * xs.len() as f64).ceil() as usize).clamp(1, xs.len());
    *xs.select_nth_unstable_by(k - 1, f64::total_cmp).1
}

/// Silverman's rule of thumb `0.9 * min(sd, IQR / 1.34) * N^{-1/5}`.
pub fn silverman_bandwidth(values: &[f64]) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::Degenerate("need at least two values for a bandwidth".into()));
    }
    let mut scratch = values.to_vec();
    let q1 = order_quantile(&mut scratch, 0.25);
    let q3 = order_quantile(&mut scratch, 0.75);
    let iqr = q3 - q1;
    if !(iqr > 0.0) {
        return Err(Error::Degenerate("zero interquartile range".into()));
    }
    let sd = variance(values).sqrt();
    let spread = sd.min(iqr / 1.34);
    Ok(0.9 * spread * (values.len() as f64).powf(-0.2))
}

/// Gaussian kernel density estimate of `values` at `x`.
pub fn gaussian_kde_at(values: &[f64], bandwidth: f64, x: f64) -> f64 {
    let inv_h = 1.0 / bandwidth;
    let sum: f64 = values
        .iter()
        .map(|&v| {
            let z = (x - v) * inv_h;
            (-0.5 * z * z).exp()
        })
        .sum();
    sum * inv_h / (values.len() as f64 * (2.0 * std::f64::consts::PI).sqrt())
}

/// Kolmogorov-Smirnov distance `sup_t |F_R(t) - cdf(t)|` of the empirical
/// distribution of `values` from `cdf`. Reorders `values`.
pub fn ks_distance(values: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    values.sort_unstable_by(f64::total_cmp);
    let r = values.len() as f64;
    values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let c = cdf(v);
            (c - i as f64 / r).abs().max(((i + 1) as f64 / r - c).abs())
        })
        .fold(0.0, f64::max)
}

/// Asymptotic Kolmogorov-Smirnov critical value `c(alpha) / sqrt(count)`,
/// with `c(alpha) = sqrt(-ln(alpha / 2) / 2)` (1.628 at `alpha = 0.01`).
pub fn ks_critical(alpha: f64, count: usize) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt() / (count as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_functions() {
        assert!((phi_cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((phi_inv(0.975) - 1.959963984540054).abs() < 1e-9);
        assert!((phi_pdf(0.0) - 1.0 / (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn moments() {
        assert_eq!(mean(&[1.0, 2.0, 3.0]), 2.0);
        assert_eq!(variance(&[1.0, 2.0, 3.0]), 1.0);
        assert!(variance(&[1.0]).is_nan());
    }

    #[test]
    fn order_quantile_convention() {
        assert_eq!(order_quantile(&mut [4.0, 1.0, 3.0, 2.0], 0.5), 2.0);
        assert_eq!(order_quantile(&mut [4.0, 1.0, 3.0, 2.0, 5.0], 0.5), 3.0);
        assert_eq!(order_quantile(&mut [4.0, 1.0, 3.0, 2.0], 0.75), 3.0);
    }

    #[test]
    fn silverman_rejects_zero_iqr() {
        assert!(silverman_bandwidth(&[1.0; 10]).is_err());
        let mut v = vec![1.0; 10];
        v[0] = 100.0;
        assert!(silverman_bandwidth(&v).is_err());
        assert!(silverman_bandwidth(&[0.0, 1.0, 2.0, 3.0]).unwrap() > 0.0);
    }

    #[test]
    fn kde_integrates_to_one() {
        let values = [0.0, 0.3, 1.0, 1.1, 2.5];
        let h = 0.4;
        let step = 1e-3;
        let total: f64 = (-5000..8000).map(|i| gaussian_kde_at(&values, h, i as f64 * step) * step).sum();
        assert!((total - 1.0).abs() < 1e-6);
    }

    #[test]
    fn ks_single_point() {
        // one value at 0: the empirical CDF jumps 0 -> 1 where Phi = 1/2
        assert!((ks_distance(&mut [0.0], phi_cdf) - 0.5).abs() < 1e-15);
        assert!((ks_critical(0.01, 2000) - 0.0364).abs() < 1e-4);
    }
}
