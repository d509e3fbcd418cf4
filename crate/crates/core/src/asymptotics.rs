//! Normal-approximation inference for U-quantile-statistics.
//!
//! For i.i.d. data, `sqrt(n) (H_pn - H_p)` is asymptotically normal with
//! standard deviation `m sqrt(zeta) / f(H_p)`, where `f` is the density of
//! the kernel-value distribution at the population quantile and
//!
//! ```text
//! zeta = P{ h(x1, ..., xm) <= H_p, h(x1, x_{m+1}, ..., x_{2m-1}) <= H_p } - p^2
//!      = E[ P{ h(x, x2, ..., xm) <= H_p | x = x1 }^2 ] - p^2
//! ```
//!
//! This module estimates both constants from data ([`zeta_plugin`],
//! [`density_at_quantile`]), builds confidence intervals from them, computes
//! the relative efficiency against the ordinary U-statistic, and provides
//! population oracles for the pairwise-average and interpoint-distance cases.

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::DistributionSpec;
use crate::engine::{
    binomial, check_sample, count_leq, for_each_value, next_combination, u_quantile, Backend, EngineConfig,
    QuantileSpec, UQuantileEstimate,
};
use crate::kernels::{Kernel, KernelSpec, Norm, PairOrder};
use crate::quadrature::{integrate, integrate_real_line};
use crate::rng::{derive_seed, stream_rng};
use crate::stats::{gaussian_kde_at, phi_cdf, phi_inv, phi_pdf, silverman_bandwidth};
use crate::{Error, Result, Sample};

pub const DEFAULT_SEED: u64 = 0x5EED_2009;

/// Tuning for the plug-in estimators.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticConfig {
    pub engine: EngineConfig,
    pub backend: Backend,
    /// Per-point cap on the `(m-1)`-subsets used for the conditional
    /// probabilities in `zeta`; above it a seeded random subsample is used.
    pub max_subsets_per_point: u64,
    /// Number of random tuples used by the density estimate when the kernel
    /// values exceed the materialization cap.
    pub density_subsample: usize,
    /// KDE bandwidth; Silverman's rule when `None`.
    pub bandwidth: Option<f64>,
    pub seed: u64,
}

impl Default for AsymptoticConfig {
    fn default() -> Self {
        AsymptoticConfig {
            engine: EngineConfig::default(),
            backend: Backend::Auto,
            max_subsets_per_point: 100_000,
            density_subsample: 1_000_000,
            bandwidth: None,
            seed: DEFAULT_SEED,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZetaEstimate {
    /// `mean_i g1(i)^2 - p_hat^2`. May be nonpositive; see [`ZetaEstimate::is_positive`].
    pub value: f64,
    /// Fraction of kernel values `<= H_pn`.
    pub p_hat: f64,
    /// True when the conditional probabilities used random subsets.
    pub subsampled: bool,
    pub estimate: UQuantileEstimate,
}

impl ZetaEstimate {
    /// The limit theorem needs `zeta > 0`.
    pub fn is_positive(&self) -> bool {
        self.value > 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityEstimate {
    pub value: f64,
    pub bandwidth: f64,
    /// True when the KDE ran on a random subsample of kernel values.
    pub subsampled: bool,
    pub estimate: UQuantileEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticSummary {
    pub point: f64,
    pub zeta_hat: f64,
    pub density_hat: f64,
    /// `m sqrt(zeta_hat) / (density_hat sqrt(n))`.
    pub std_error: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
    pub confidence_level: f64,
    pub n: usize,
    pub degree: usize,
    pub bandwidth: f64,
    pub estimate: UQuantileEstimate,
    pub zeta_subsampled: bool,
    pub density_subsampled: bool,
}

/// One-sided derivatives `F'(H_p-)` and `F'(H_p+)` of the kernel-value
/// distribution at the quantile. They may differ; each governs one tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OnesidedConstants {
    pub left_derivative: f64,
    pub right_derivative: f64,
}

impl OnesidedConstants {
    pub fn new(left_derivative: f64, right_derivative: f64) -> Result<Self> {
        if left_derivative > 0.0 && right_derivative > 0.0 && left_derivative.is_finite() && right_derivative.is_finite() {
            Ok(OnesidedConstants {
                left_derivative,
                right_derivative,
            })
        } else {
            Err(Error::InvalidArgument(format!(
                "one-sided derivatives must be positive and finite, got ({left_derivative}, {right_derivative})"
            )))
        }
    }
}

/// Confidence interval from user-supplied one-sided derivatives. Overshoot
/// (`H_pn > H_p`) is scaled by `F'(H_p+)`, undershoot by `F'(H_p-)`, so the
/// interval is asymmetric when they differ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OnesidedInterval {
    pub point: f64,
    pub zeta_hat: f64,
    /// `m sqrt(zeta_hat) / (F'(H_p+) sqrt(n))`, sets the lower endpoint.
    pub lower_std_error: f64,
    /// `m sqrt(zeta_hat) / (F'(H_p-) sqrt(n))`, sets the upper endpoint.
    pub upper_std_error: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
    pub confidence_level: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyInput {
    /// Covariance of two kernel values sharing exactly one argument.
    pub zeta1: f64,
    pub zeta: f64,
    /// Kernel-value density at its center of symmetry.
    pub density_at_mu: f64,
    pub mu: f64,
}

/// Asymptotic efficiency of the median of kernel values relative to the
/// ordinary U-statistic with the same kernel, `f(mu)^2 zeta1 / zeta`.
pub fn efficiency(input: &EfficiencyInput) -> Result<f64> {
    let EfficiencyInput {
        zeta1,
        zeta,
        density_at_mu,
        ..
    } = *input;
    for (name, v) in [("zeta1", zeta1), ("zeta", zeta), ("density_at_mu", density_at_mu)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidArgument(format!("{name} must be positive and finite, got {v}")));
        }
    }
    Ok(density_at_mu * density_at_mu * zeta1 / zeta)
}

/// Empirical conditional probabilities `g1(i)`: for each point `i`, the
/// fraction of `(m-1)`-subsets `J` of the other points with
/// `h(x_i, J) <= threshold`. Returns the fractions and whether any point used
/// a random subsample of subsets.
pub fn conditional_fractions(
    sample: &Sample,
    kernel: &dyn Kernel,
    threshold: f64,
    cfg: &AsymptoticConfig,
) -> Result<(Vec<f64>, bool)> {
    check_sample(sample, kernel)?;
    let n = sample.len();
    let m = kernel.degree();
    if m == 1 {
        let g = sample
            .points()
            .map(|p| (kernel.evaluate(&[p]) <= threshold) as u8 as f64)
            .collect();
        return Ok((g, false));
    }
    if n < 2 {
        return Err(Error::TooFewPoints { n, m: 2 });
    }
    if let Some(order) = kernel.pair_order(sample.dim()) {
        return Ok((pair_fractions(sample, order, threshold), false));
    }

    let subsets = binomial(n as u64 - 1, m as u64 - 1).unwrap_or(u128::MAX);
    let subsample = subsets > cfg.max_subsets_per_point as u128;
    let point_seed = derive_seed(cfg.seed, 0x7a);
    let g = (0..n)
        .into_par_iter()
        .map(|i| {
            let xi = sample.point(i);
            let mut buf: Vec<&[f64]> = vec![xi; m];
            // position j among the n-1 others maps to sample index j or j+1
            let other = |j: usize| if j < i { j } else { j + 1 };
            let mut hits = 0u64;
            let mut total = 0u64;
            if subsample {
                let mut rng = stream_rng(point_seed, i as u64);
                for _ in 0..cfg.max_subsets_per_point {
                    for (slot, j) in buf[1..].iter_mut().zip(index::sample(&mut rng, n - 1, m - 1)) {
                        *slot = sample.point(other(j));
                    }
                    hits += (kernel.evaluate(&buf) <= threshold) as u64;
                    total += 1;
                }
            } else {
                let mut idx: Vec<usize> = (0..m - 1).collect();
                loop {
                    for (slot, &j) in buf[1..].iter_mut().zip(&idx) {
                        *slot = sample.point(other(j));
                    }
                    hits += (kernel.evaluate(&buf) <= threshold) as u64;
                    total += 1;
                    if !next_combination(&mut idx, n - 1) {
                        break;
                    }
                }
            }
            hits as f64 / total as f64
        })
        .collect();
    Ok((g, subsample))
}

/// `g1(i)` for degree-2 scalar kernels with monotone pair structure, by
/// binary search over the sorted sample.
fn pair_fractions(sample: &Sample, order: PairOrder, threshold: f64) -> Vec<f64> {
    let mut xs = sample.coords().to_vec();
    xs.sort_unstable_by(f64::total_cmp);
    let others = (xs.len() - 1) as f64;
    sample
        .coords()
        .iter()
        .map(|&x| {
            // counts over all j including the point itself, then drops it
            let (count, self_value) = match order {
                PairOrder::Midpoint => (xs.partition_point(|&y| (x + y) / 2.0 <= threshold), (x + x) / 2.0),
                PairOrder::AbsDifference => {
                    let split = xs.partition_point(|&y| y < x);
                    let below = &xs[..split];
                    let start = below.partition_point(|&y| (x - y).abs() > threshold);
                    let above = xs[split..].partition_point(|&y| (y - x).abs() <= threshold);
                    (split - start + above, 0.0)
                }
            };
            let count = count - (self_value <= threshold) as usize;
            count as f64 / others
        })
        .collect()
}

/// Plug-in estimate of `zeta` at the sample quantile `H_pn`.
///
/// Requires `n >= 2m - 1`. A nonpositive result is returned, not clamped;
/// interval construction refuses it.
pub fn zeta_plugin(
    sample: &Sample,
    kernel: &dyn Kernel,
    spec: QuantileSpec,
    cfg: &AsymptoticConfig,
) -> Result<ZetaEstimate> {
    check_sample(sample, kernel)?;
    let estimate = u_quantile(sample, kernel, spec, cfg.backend, &cfg.engine)?;
    zeta_at(sample, kernel, estimate, cfg)
}

pub(crate) fn zeta_at(
    sample: &Sample,
    kernel: &dyn Kernel,
    estimate: UQuantileEstimate,
    cfg: &AsymptoticConfig,
) -> Result<ZetaEstimate> {
    let n = sample.len();
    let m = kernel.degree();
    if n < 2 * m - 1 {
        return Err(Error::TooFewPoints { n, m: 2 * m - 1 });
    }
    let p_hat = count_leq(sample, kernel, estimate.value)? as f64 / estimate.total_count as f64;
    let (g, subsampled) = conditional_fractions(sample, kernel, estimate.value, cfg)?;
    let mean_sq = g.iter().map(|v| v * v).sum::<f64>() / n as f64;
    Ok(ZetaEstimate {
        value: mean_sq - p_hat * p_hat,
        p_hat,
        subsampled,
        estimate,
    })
}

/// Gaussian-KDE estimate of the kernel-value density at `H_pn`.
///
/// Uses all `C(n, m)` values when they fit under the materialization cap,
/// otherwise `cfg.density_subsample` uniformly drawn index tuples.
pub fn density_at_quantile(
    sample: &Sample,
    kernel: &dyn Kernel,
    spec: QuantileSpec,
    bandwidth: Option<f64>,
    cfg: &AsymptoticConfig,
) -> Result<DensityEstimate> {
    check_sample(sample, kernel)?;
    let estimate = u_quantile(sample, kernel, spec, cfg.backend, &cfg.engine)?;
    density_at(sample, kernel, estimate, bandwidth, cfg)
}

pub(crate) fn density_at(
    sample: &Sample,
    kernel: &dyn Kernel,
    estimate: UQuantileEstimate,
    bandwidth: Option<f64>,
    cfg: &AsymptoticConfig,
) -> Result<DensityEstimate> {
    let n = sample.len();
    let m = kernel.degree();
    let subsampled = estimate.total_count > cfg.engine.materialization_cap;
    let values = if subsampled {
        let mut rng = stream_rng(derive_seed(cfg.seed, 0xde), 0);
        let mut buf: Vec<&[f64]> = vec![sample.point(0); m];
        (0..cfg.density_subsample)
            .map(|_| {
                for (slot, j) in buf.iter_mut().zip(index::sample(&mut rng, n, m)) {
                    *slot = sample.point(j);
                }
                kernel.evaluate(&buf)
            })
            .collect::<Vec<f64>>()
    } else {
        let mut out = Vec::with_capacity(estimate.total_count as usize);
        for_each_value(sample, kernel, |v| out.push(v));
        out
    };
    let bandwidth = match bandwidth {
        Some(h) if h > 0.0 && h.is_finite() => h,
        Some(h) => return Err(Error::InvalidArgument(format!("bandwidth must be positive, got {h}"))),
        None => silverman_bandwidth(&values)?,
    };
    Ok(DensityEstimate {
        value: gaussian_kde_at(&values, bandwidth, estimate.value),
        bandwidth,
        subsampled,
        estimate,
    })
}

pub(crate) fn normal_critical(level: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&level) {
        return Err(Error::InvalidArgument(format!(
            "confidence level must lie in [0, 1), got {level}"
        )));
    }
    Ok(if level == 0.0 { 0.0 } else { phi_inv((1.0 + level) / 2.0) })
}

/// Assembles a summary from already computed plug-in pieces.
pub fn summary_from_parts(
    zeta: &ZetaEstimate,
    density: &DensityEstimate,
    n: usize,
    degree: usize,
    level: f64,
) -> Result<AsymptoticSummary> {
    let z = normal_critical(level)?;
    if !zeta.is_positive() {
        return Err(Error::Hypothesis {
            hypothesis: "ζ > 0",
            value: zeta.value,
        });
    }
    if !(density.value > 0.0) {
        return Err(Error::Hypothesis {
            hypothesis: "F'(H̃_p) > 0",
            value: density.value,
        });
    }
    let point = zeta.estimate.value;
    let std_error = degree as f64 * zeta.value.sqrt() / (density.value * (n as f64).sqrt());
    Ok(AsymptoticSummary {
        point,
        zeta_hat: zeta.value,
        density_hat: density.value,
        std_error,
        ci_lower: point - z * std_error,
        ci_upper: point + z * std_error,
        confidence_level: level,
        n,
        degree,
        bandwidth: density.bandwidth,
        estimate: zeta.estimate,
        zeta_subsampled: zeta.subsampled,
        density_subsampled: density.subsampled,
    })
}

/// Point estimate, plug-in constants and the normal-approximation interval
/// `point ± z_{(1+level)/2} · m sqrt(zeta_hat) / (f_hat sqrt(n))`.
pub fn asymptotic_summary(
    sample: &Sample,
    kernel: &dyn Kernel,
    spec: QuantileSpec,
    level: f64,
    cfg: &AsymptoticConfig,
) -> Result<AsymptoticSummary> {
    normal_critical(level)?;
    check_sample(sample, kernel)?;
    let estimate = u_quantile(sample, kernel, spec, cfg.backend, &cfg.engine)?;
    let zeta = zeta_at(sample, kernel, estimate, cfg)?;
    if !zeta.is_positive() {
        return Err(Error::Hypothesis {
            hypothesis: "ζ > 0",
            value: zeta.value,
        });
    }
    let density = density_at(sample, kernel, estimate, cfg.bandwidth, cfg)?;
    summary_from_parts(&zeta, &density, sample.len(), kernel.degree(), level)
}

/// Interval from plug-in `zeta` and known one-sided derivatives.
pub fn onesided_interval(
    sample: &Sample,
    kernel: &dyn Kernel,
    spec: QuantileSpec,
    level: f64,
    constants: OnesidedConstants,
    cfg: &AsymptoticConfig,
) -> Result<OnesidedInterval> {
    let z = normal_critical(level)?;
    let zeta = zeta_plugin(sample, kernel, spec, cfg)?;
    if !zeta.is_positive() {
        return Err(Error::Hypothesis {
            hypothesis: "ζ > 0",
            value: zeta.value,
        });
    }
    let scale = kernel.degree() as f64 * zeta.value.sqrt() / (sample.len() as f64).sqrt();
    let lower_std_error = scale / constants.right_derivative;
    let upper_std_error = scale / constants.left_derivative;
    let point = zeta.estimate.value;
    Ok(OnesidedInterval {
        point,
        zeta_hat: zeta.value,
        lower_std_error,
        upper_std_error,
        ci_lower: point - z * lower_std_error,
        ci_upper: point + z * upper_std_error,
        confidence_level: level,
    })
}

// ---------------------------------------------------------------------------
// Population oracles
// ---------------------------------------------------------------------------

/// Population constants of a kernel/distribution pair at level `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleConstants {
    pub p: f64,
    pub degree: usize,
    /// Population quantile `H_p` of the kernel-value distribution.
    pub quantile: f64,
    pub quantile_se: f64,
    pub zeta: f64,
    pub zeta_se: f64,
    pub left_derivative: f64,
    pub right_derivative: f64,
    pub derivative_se: f64,
}

impl OracleConstants {
    /// Asymptotic variance `m^2 zeta / f^2` of `sqrt(n) (H_pn - H_p)`, when
    /// the density is continuous at the quantile.
    pub fn sigma2(&self) -> Option<f64> {
        (self.left_derivative == self.right_derivative).then(|| {
            let m = self.degree as f64;
            m * m * self.zeta / (self.left_derivative * self.left_derivative)
        })
    }

    pub fn onesided(&self) -> OnesidedConstants {
        OnesidedConstants {
            left_derivative: self.left_derivative,
            right_derivative: self.right_derivative,
        }
    }
}

/// Constants of the median of pairwise averages under a symmetric density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HlOracle {
    pub center: f64,
    /// Always `1/12`: `E[G(X)^2] - 1/4` with `G(X)` uniform.
    pub zeta: f64,
    /// `∫ g(x)^2 dx`.
    pub square_integral: f64,
    /// `f(center) = 2 ∫ g^2`.
    pub density_at_center: f64,
    /// `4 zeta / f(center)^2 = 1 / (12 (∫ g^2)^2)`.
    pub sigma2: f64,
}

/// Closed-form constants for the pairwise-average kernel under a built-in
/// symmetric scalar distribution (normal, uniform, logistic, Laplace).
pub fn oracle_hl(dist: &DistributionSpec) -> Result<HlOracle> {
    let center = dist
        .symmetry_center()
        .ok_or_else(|| Error::NoOracle(format!("walsh kernel under asymmetric {dist}")))?;
    let square_integral = dist
        .density_square_integral()
        .ok_or_else(|| Error::NoOracle(format!("walsh kernel under {dist}")))?;
    Ok(hl_from_square_integral(center, square_integral))
}

fn hl_from_square_integral(center: f64, square_integral: f64) -> HlOracle {
    HlOracle {
        center,
        zeta: 1.0 / 12.0,
        square_integral,
        density_at_center: 2.0 * square_integral,
        sigma2: 1.0 / (12.0 * square_integral * square_integral),
    }
}

/// `∫ g(x)^2 dx` by adaptive quadrature (relative tolerance `1e-8`).
pub fn density_square_integral_numeric(dist: &DistributionSpec) -> Result<f64> {
    if !dist.is_scalar() {
        return Err(Error::NoOracle(format!("square integral of {dist}")));
    }
    let f = |x: f64| {
        let g = dist.pdf(x);
        g * g
    };
    // rough scale for the relative tolerance
    let scale = dist.pdf(dist.quantile(0.5)).max(1e-300);
    let tol = 1e-10 * scale;
    Ok(match *dist {
        DistributionSpec::Uniform { a, b } => integrate(&f, a, b, tol),
        DistributionSpec::Exponential { .. } => integrate_real_line(&|x| if x < 0.0 { 0.0 } else { f(x) }, tol),
        DistributionSpec::SplitNormal { .. } => {
            integrate_real_line(&|x| if x < 0.0 { f(x) } else { 0.0 }, tol)
                + integrate_real_line(&|x| if x >= 0.0 { f(x) } else { 0.0 }, tol)
        }
        _ => integrate_real_line(&f, tol),
    })
}

/// `P(Z1 <= z, Z2 <= z)` for standard bivariate normal with correlation
/// `rho` in `[0, 1)`, by one-dimensional quadrature over a shared factor.
pub fn bivariate_normal_diagonal(z: f64, rho: f64) -> f64 {
    let a = rho.sqrt();
    let b = (1.0 - rho).sqrt();
    integrate_real_line(
        &|w| {
            let c = phi_cdf((z - a * w) / b);
            c * c * phi_pdf(w)
        },
        1e-13,
    )
}

/// Oracle constants for the m-wise mean kernel (`mean:m`).
///
/// * `m = 1`: any scalar family; `H_p = G^{-1}(p)`, `zeta = p(1-p)`.
/// * normal data, any `m` and `p`: the kernel values are `N(mu, sigma^2/m)`
///   and two values sharing one argument have correlation `1/m`, so
///   `zeta = P(Z1 <= z_p, Z2 <= z_p; 1/m) - p^2`.
/// * `m = 2`, `p = 1/2`: any symmetric family via [`oracle_hl`].
pub fn oracle_mwise_mean(dist: &DistributionSpec, m: usize, p: f64) -> Result<OracleConstants> {
    QuantileSpec::new(p)?;
    if m == 0 {
        return Err(Error::InvalidArgument("mean kernel degree must be at least 1".into()));
    }
    let exact = |quantile: f64, zeta: f64, left: f64, right: f64| OracleConstants {
        p,
        degree: m,
        quantile,
        quantile_se: 0.0,
        zeta,
        zeta_se: 0.0,
        left_derivative: left,
        right_derivative: right,
        derivative_se: 0.0,
    };
    if m == 1 && dist.is_scalar() {
        let q = dist.quantile(p);
        let (left, right) = dist.one_sided_density(q);
        return Ok(exact(q, p * (1.0 - p), left, right));
    }
    match *dist {
        DistributionSpec::Normal { mu, sigma } => {
            let zp = phi_inv(p);
            let sd = sigma / (m as f64).sqrt();
            let f = phi_pdf(zp) / sd;
            let zeta = bivariate_normal_diagonal(zp, 1.0 / m as f64) - p * p;
            Ok(exact(mu + sd * zp, zeta, f, f))
        }
        _ if m == 2 && p == 0.5 => {
            let hl = oracle_hl(dist)?;
            Ok(exact(hl.center, hl.zeta, hl.density_at_center, hl.density_at_center))
        }
        _ => Err(Error::NoOracle(format!("mean:{m} under {dist} at p = {p}"))),
    }
}

/// Monte Carlo sample sizes for the interpoint-distance oracle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterpointBudget {
    /// Outer draws `x` for the squared ball probability.
    pub outer: usize,
    /// Inner draws per `x` estimating the ball probability.
    pub inner: usize,
    /// Draws `(x, u)` for the shell integral `f(theta)`.
    pub density_draws: usize,
}

impl Default for InterpointBudget {
    fn default() -> Self {
        InterpointBudget {
            outer: 4_000,
            inner: 2_000,
            density_draws: 2_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterpointOracle {
    pub theta: f64,
    /// Mean probability that a random point lies within `theta` of `x`.
    pub ball_probability: f64,
    /// `E[ P(||X - x|| <= theta)^2 ] - p^2`.
    pub zeta: f64,
    pub zeta_se: f64,
    /// Density of the interpoint distance at `theta`.
    pub f_theta: f64,
    pub f_theta_se: f64,
}

const BATCH: usize = 64;

/// Point drawn from the cone measure on the unit sphere of `norm`: the radial
/// projection of a uniform point in the unit ball.
fn cone_direction<R: Rng + ?Sized>(norm: Norm, rng: &mut R, out: &mut [f64]) {
    use rand_distr::{Exp1, StandardNormal};
    match norm {
        Norm::Euclidean => {
            for c in out.iter_mut() {
                *c = rng.sample(StandardNormal);
            }
        }
        Norm::Manhattan => {
            for c in out.iter_mut() {
                let e: f64 = rng.sample(Exp1);
                *c = if rng.random::<bool>() { e } else { -e };
            }
        }
        Norm::Chebyshev => {
            for c in out.iter_mut() {
                *c = 2.0 * rng.random::<f64>() - 1.0;
            }
        }
    }
    let zero = vec![0.0; out.len()];
    let r = norm.distance(out, &zero);
    for c in out.iter_mut() {
        *c /= r;
    }
}

fn mean_and_se(sum: f64, sum_sq: f64, count: usize) -> (f64, f64) {
    let c = count as f64;
    let mean = sum / c;
    let var = ((sum_sq - c * mean * mean) / (c - 1.0)).max(0.0);
    (mean, (var / c).sqrt())
}

/// Monte Carlo quadrature of the interpoint-distance constants at `theta`:
///
/// ```text
/// zeta + p^2 = ∫ ( ∫_{x + theta B} g(y) dy )^2 g(x) dx
/// f(theta)   = ∫ ( ∫_{x + theta S} g(y) dy ) g(x) dx
/// ```
///
/// The squared inner probability is estimated without bias from `K` inner
/// draws as `c (c - 1) / (K (K - 1))`. The shell integral is written as
/// `d vol(B) theta^{d-1} E[g(X + theta U)]` with `U` from the cone measure.
pub fn oracle_interpoint(
    dist: &DistributionSpec,
    norm: Norm,
    theta: f64,
    p: f64,
    budget: &InterpointBudget,
    seed: u64,
) -> Result<InterpointOracle> {
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::InvalidArgument(format!("theta must be positive, got {theta}")));
    }
    QuantileSpec::new(p)?;
    if budget.outer < 2 || budget.inner < 2 || budget.density_draws < 2 {
        return Err(Error::InvalidArgument("oracle budget needs at least two draws per stage".into()));
    }
    let d = dist.dim();

    let ball_seed = derive_seed(seed, 0xba11);
    let batches = budget.outer.div_ceil(BATCH);
    let (sum_p, sum_sq, sum_sq2) = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream_rng(ball_seed, b as u64);
            let mut x = Vec::with_capacity(d);
            let mut y = Vec::with_capacity(d);
            let k = budget.inner as f64;
            let mut acc = (0.0, 0.0, 0.0);
            for _ in (b * BATCH)..((b + 1) * BATCH).min(budget.outer) {
                x.clear();
                dist.draw(&mut rng, &mut x);
                let mut hits = 0usize;
                for _ in 0..budget.inner {
                    y.clear();
                    dist.draw(&mut rng, &mut y);
                    hits += (norm.distance(&x, &y) <= theta) as usize;
                }
                let c = hits as f64;
                let sq = c * (c - 1.0) / (k * (k - 1.0));
                acc.0 += c / k;
                acc.1 += sq;
                acc.2 += sq * sq;
            }
            acc
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold((0.0, 0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));
    let (p2, zeta_se) = mean_and_se(sum_sq, sum_sq2, budget.outer);

    let shell_seed = derive_seed(seed, 0x5e11);
    let shell_area = d as f64 * norm.unit_ball_volume(d) * theta.powi(d as i32 - 1);
    let batches = budget.density_draws.div_ceil(BATCH * 16);
    let (sum_f, sum_f2) = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream_rng(shell_seed, b as u64);
            let mut x = Vec::with_capacity(d);
            let mut u = vec![0.0; d];
            let mut acc = (0.0, 0.0);
            for _ in (b * BATCH * 16)..((b + 1) * BATCH * 16).min(budget.density_draws) {
                x.clear();
                dist.draw(&mut rng, &mut x);
                cone_direction(norm, &mut rng, &mut u);
                for (xc, uc) in x.iter_mut().zip(&u) {
                    *xc += theta * uc;
                }
                let v = shell_area * dist.density(&x);
                acc.0 += v;
                acc.1 += v * v;
            }
            acc
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let (f_theta, f_theta_se) = mean_and_se(sum_f, sum_f2, budget.density_draws);

    Ok(InterpointOracle {
        theta,
        ball_probability: sum_p / budget.outer as f64,
        zeta: p2 - p * p,
        zeta_se,
        f_theta,
        f_theta_se,
    })
}

/// Area of the disk of radius `r` around `(cx, cy)` inside the unit square.
pub fn disk_square_area(cx: f64, cy: f64, r: f64) -> f64 {
    // offsets u = x - cx; the chord half-height s(u) = sqrt(r^2 - u^2)
    // integrates to chord(u)
    let (u0, u1) = ((-cx).max(-r), (1.0 - cx).min(r));
    if u0 >= u1 {
        return 0.0;
    }
    let chord = |u: f64| {
        let u = u.clamp(-r, r);
        0.5 * (u * (r * r - u * u).max(0.0).sqrt() + r * r * (u / r).asin())
    };
    let mut cuts = vec![u0, u1];
    for h in [1.0 - cy, cy] {
        if h < r {
            let w = (r * r - h * h).sqrt();
            cuts.extend([-w, w].into_iter().filter(|&u| u > u0 && u < u1));
        }
    }
    cuts.sort_unstable_by(f64::total_cmp);
    let mut area = 0.0;
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let mid = 0.5 * (a + b);
        let s = (r * r - mid * mid).max(0.0).sqrt();
        // height = min(1, cy + s) - max(0, cy - s) = constant + k s
        let (mut constant, mut k) = (0.0, 0.0);
        if s >= 1.0 - cy {
            constant += 1.0;
        } else {
            constant += cy;
            k += 1.0;
        }
        if s < cy {
            constant -= cy;
            k += 1.0;
        }
        area += constant * (b - a) + k * (chord(b) - chord(a));
    }
    area
}

/// `E[A(X)^2] - p^2` for two uniform points of the unit square and the
/// Euclidean ball of radius `theta`, by nested adaptive quadrature of the
/// exact ball area `A`. The second value is the change against a run at
/// 100 times the tolerance.
pub fn unit_square_zeta(theta: f64, p: f64) -> (f64, f64) {
    let run = |tol: f64| {
        let inner = |x: f64| integrate(&|y| disk_square_area(x, y, theta).powi(2), 0.0, 0.5, tol);
        4.0 * integrate(&inner, 0.0, 0.5, tol)
    };
    let fine = run(1e-11);
    let coarse = run(1e-9);
    (fine - p * p, (fine - coarse).abs())
}

/// CDF of the Euclidean distance between two uniform points of the unit
/// square, valid for `0 <= r <= 1`: `pi r^2 - 8 r^3 / 3 + r^4 / 2`.
pub fn unit_square_distance_cdf(r: f64) -> f64 {
    std::f64::consts::PI * r * r - 8.0 / 3.0 * r.powi(3) + 0.5 * r.powi(4)
}

/// Density of the same distance on `0 <= r <= 1`.
pub fn unit_square_distance_pdf(r: f64) -> f64 {
    2.0 * std::f64::consts::PI * r - 8.0 * r * r + 2.0 * r.powi(3)
}

/// Population p-quantile of the interpoint distance, with a standard error.
///
/// Closed form (bisection on the exact CDF) for the Euclidean unit square
/// when the quantile is at most 1; otherwise the order statistic of `draws`
/// simulated distances, with a distribution-free standard error from the
/// spread of neighbouring order statistics.
pub fn interpoint_quantile(
    dist: &DistributionSpec,
    norm: Norm,
    p: f64,
    draws: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    QuantileSpec::new(p)?;
    if *dist == (DistributionSpec::UnitCube { dim: 2 }) && norm == Norm::Euclidean && p <= unit_square_distance_cdf(1.0) {
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if unit_square_distance_cdf(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        return Ok((0.5 * (lo + hi), 0.0));
    }
    if draws < 100 {
        return Err(Error::InvalidArgument("need at least 100 draws for a Monte Carlo quantile".into()));
    }
    let base = derive_seed(seed, 0x9a);
    let chunk = 1 << 16;
    let mut distances: Vec<f64> = (0..draws.div_ceil(chunk))
        .into_par_iter()
        .flat_map_iter(|b| {
            let mut rng = stream_rng(base, b as u64);
            let count = chunk.min(draws - b * chunk);
            let mut x = Vec::new();
            let mut y = Vec::new();
            (0..count)
                .map(|_| {
                    x.clear();
                    y.clear();
                    dist.draw(&mut rng, &mut x);
                    dist.draw(&mut rng, &mut y);
                    norm.distance(&x, &y)
                })
                .collect::<Vec<_>>()
        })
        .collect();
    distances.sort_unstable_by(f64::total_cmp);
    let n = draws as f64;
    let k = ((p * n).ceil() as usize).clamp(1, draws) - 1;
    let spread = (n * p * (1.0 - p)).sqrt().ceil() as usize;
    let lo = distances[k.saturating_sub(spread)];
    let hi = distances[(k + spread).min(draws - 1)];
    Ok((distances[k], 0.5 * (hi - lo)))
}

/// Population constants for a built-in kernel under a built-in distribution,
/// where one is available. Interpoint-distance constants are Monte Carlo
/// quadratures with reported standard errors.
pub fn oracle_constants(
    dist: &DistributionSpec,
    kernel: &KernelSpec,
    p: f64,
    budget: &InterpointBudget,
    seed: u64,
) -> Result<OracleConstants> {
    match *kernel {
        KernelSpec::Walsh => oracle_mwise_mean(dist, 2, p),
        KernelSpec::Mean(m) => oracle_mwise_mean(dist, m, p),
        KernelSpec::Distance(norm) => {
            let (quantile, quantile_se) = interpoint_quantile(dist, norm, p, 10_000_000, seed)?;
            let unit_square = *dist == (DistributionSpec::UnitCube { dim: 2 }) && norm == Norm::Euclidean;
            let (zeta, zeta_se, f, f_se) = if unit_square && quantile <= 1.0 {
                let (zeta, zeta_se) = unit_square_zeta(quantile, p);
                (zeta, zeta_se, unit_square_distance_pdf(quantile), 0.0)
            } else {
                let io = oracle_interpoint(dist, norm, quantile, p, budget, seed)?;
                (io.zeta, io.zeta_se, io.f_theta, io.f_theta_se)
            };
            Ok(OracleConstants {
                p,
                degree: 2,
                quantile,
                quantile_se,
                zeta,
                zeta_se,
                left_derivative: f,
                right_derivative: f,
                derivative_se: f_se,
            })
        }
    }
}
