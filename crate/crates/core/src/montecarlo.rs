//! Seeded simulation harness for the limit law of U-quantile-statistics.
//!
//! Replicate `r` draws its sample from stream `r` of the master seed, and
//! replicates are collected in index order, so every report is identical for
//! any number of worker threads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{
    asymptotic_summary, oracle_constants, AsymptoticConfig, InterpointBudget, OracleConstants,
};
use crate::distributions::DistributionSpec;
use crate::engine::{for_each_value, u_quantile, Backend, EngineConfig, QuantileSpec};
use crate::kernels::{Kernel, KernelSpec};
use crate::rng::{derive_seed, stream_rng};
use crate::stats::{ks_critical, ks_distance, mean, phi_cdf, phi_inv, variance};
use crate::{Error, Result, Sample};

/// Significance level of the reported Kolmogorov-Smirnov critical values.
pub const KS_ALPHA: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioMode {
    /// Oracle-standardized limit law (two-sided density).
    #[default]
    Limit,
    /// Tails standardized separately by the one-sided derivatives.
    Onesided,
    /// Variance ratio against the ordinary U-statistic.
    Efficiency,
    /// Coverage of plug-in confidence intervals.
    Coverage,
}

impl std::str::FromStr for ScenarioMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "limit" => Ok(ScenarioMode::Limit),
            "onesided" => Ok(ScenarioMode::Onesided),
            "efficiency" => Ok(ScenarioMode::Efficiency),
            "coverage" => Ok(ScenarioMode::Coverage),
            other => Err(Error::InvalidArgument(format!(
                "unknown mode `{other}` (expected limit, onesided, efficiency or coverage)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub distribution: DistributionSpec,
    pub kernel: KernelSpec,
    pub p: f64,
    pub n: usize,
    pub replicates: usize,
    pub master_seed: u64,
    pub mode: ScenarioMode,
    /// Confidence level for coverage.
    pub level: f64,
}

impl ScenarioSpec {
    pub fn new(distribution: DistributionSpec, kernel: KernelSpec, p: f64, n: usize, replicates: usize, master_seed: u64) -> Self {
        ScenarioSpec {
            distribution,
            kernel,
            p,
            n,
            replicates,
            master_seed,
            mode: ScenarioMode::Limit,
            level: 0.95,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.distribution.validate()?;
        QuantileSpec::new(self.p)?;
        if self.replicates == 0 {
            return Err(Error::InvalidArgument("replicates must be at least 1".into()));
        }
        if self.n < self.kernel.degree() {
            return Err(Error::TooFewPoints {
                n: self.n,
                m: self.kernel.degree(),
            });
        }
        if !(0.0..1.0).contains(&self.level) {
            return Err(Error::InvalidArgument(format!("level must lie in [0, 1), got {}", self.level)));
        }
        self.kernel.check_dim(self.distribution.dim())
    }

    fn sample(&self, replicate: usize) -> Sample {
        self.distribution
            .sample(&mut stream_rng(self.master_seed, replicate as u64), self.n)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub level: f64,
    /// Fraction of non-refused replicates whose interval contains `H_p`.
    pub coverage: f64,
    /// Replicates whose plug-in constants violated `zeta > 0` or `f > 0`.
    pub refusals: usize,
    pub mean_ci_width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyReport {
    /// `Var(U_n) / Var(H_pn)` across replicates.
    pub variance_ratio: f64,
    /// `f(mu)^2 zeta1 / zeta` where known in closed form.
    pub analytic: Option<f64>,
    pub u_statistic_variance: f64,
    pub u_quantile_variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub distribution: String,
    pub kernel: String,
    pub p: f64,
    pub n: usize,
    pub replicates: usize,
    pub master_seed: u64,
    pub mode: ScenarioMode,
    pub oracle: OracleConstants,
    /// `m^2 zeta / f^2` when the density is continuous at `H_p`.
    pub target_variance: Option<f64>,
    /// Sample variance of `sqrt(n) (H_pn - H_p)`.
    pub empirical_variance: f64,
    pub standardized_mean: f64,
    pub standardized_variance: f64,
    pub ks_distance: f64,
    pub ks_critical: f64,
    /// Coverage of the oracle-constant interval at `level`.
    pub coverage: f64,
    pub left_tail_ks: f64,
    pub left_tail_count: usize,
    pub left_tail_critical: f64,
    pub right_tail_ks: f64,
    pub right_tail_count: usize,
    pub right_tail_critical: f64,
    pub plugin_coverage: Option<CoverageReport>,
    pub efficiency: Option<EfficiencyReport>,
    pub standardized_values: Vec<f64>,
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))
}

/// Runs `f` on every replicate index in parallel, preserving index order.
fn par_replicates<T: Send>(replicates: usize, workers: usize, f: impl Fn(usize) -> T + Sync + Send) -> Result<Vec<T>> {
    Ok(pool(workers)?.install(|| (0..replicates).into_par_iter().map(f).collect()))
}

fn estimates(spec: &ScenarioSpec, workers: usize) -> Result<Vec<f64>> {
    let qs = QuantileSpec::new(spec.p)?;
    let engine = EngineConfig::default();
    par_replicates(spec.replicates, workers, |r| {
        u_quantile(&spec.sample(r), &spec.kernel, qs, Backend::Auto, &engine).map(|e| e.value)
    })?
    .into_iter()
    .collect()
}

/// Population constants for the scenario (closed form or high-budget
/// quadrature), computed deterministically from the master seed.
pub fn scenario_oracle(spec: &ScenarioSpec) -> Result<OracleConstants> {
    oracle_constants(
        &spec.distribution,
        &spec.kernel,
        spec.p,
        &InterpointBudget::default(),
        derive_seed(spec.master_seed, 0x0AC1E),
    )
}

fn check_kink(spec: &ScenarioSpec) -> Result<()> {
    if let DistributionSpec::SplitNormal { left, right } = spec.distribution {
        if left != right && spec.p != 0.5 {
            return Err(Error::InvalidArgument(format!(
                "the density kink of {} sits at p = 0.5, not at p = {}",
                spec.distribution, spec.p
            )));
        }
    }
    Ok(())
}

/// Standardizes with the left derivative below `H_p` and the right one above.
fn standardize(values: &[f64], oracle: &OracleConstants, n: usize) -> Vec<f64> {
    let scale = (n as f64).sqrt() / (oracle.degree as f64 * oracle.zeta.sqrt());
    values
        .iter()
        .map(|&v| {
            let d = v - oracle.quantile;
            let f = if d < 0.0 { oracle.left_derivative } else { oracle.right_derivative };
            d * f * scale
        })
        .collect()
}

/// Conditional KS distances of the negative and positive standardized values
/// from the matching half of the standard normal: `2 Phi(t)` on `t < 0`
/// and `2 Phi(t) - 1` on `t > 0`. Zeros belong to neither tail.
fn tail_ks(z: &[f64]) -> ((f64, usize), (f64, usize)) {
    let mut left: Vec<f64> = z.iter().copied().filter(|&v| v < 0.0).collect();
    let mut right: Vec<f64> = z.iter().copied().filter(|&v| v > 0.0).collect();
    let ks = |v: &mut Vec<f64>, cdf: fn(f64) -> f64| {
        if v.is_empty() {
            f64::NAN
        } else {
            ks_distance(v, cdf)
        }
    };
    let (nl, nr) = (left.len(), right.len());
    (
        (ks(&mut left, |t| 2.0 * phi_cdf(t)), nl),
        (ks(&mut right, |t| 2.0 * phi_cdf(t) - 1.0), nr),
    )
}

fn build_report(spec: &ScenarioSpec, oracle: OracleConstants, values: &[f64]) -> SimulationReport {
    let n = spec.n;
    let z = standardize(values, &oracle, n);
    let root_n = (n as f64).sqrt();
    let scaled: Vec<f64> = values.iter().map(|v| root_n * (v - oracle.quantile)).collect();
    let crit = if spec.level == 0.0 { 0.0 } else { phi_inv((1.0 + spec.level) / 2.0) };
    let coverage = z.iter().filter(|v| v.abs() <= crit).count() as f64 / z.len() as f64;
    let ((left_ks, nl), (right_ks, nr)) = tail_ks(&z);
    let mut sorted = z.clone();
    SimulationReport {
        distribution: spec.distribution.to_string(),
        kernel: spec.kernel.to_string(),
        p: spec.p,
        n,
        replicates: spec.replicates,
        master_seed: spec.master_seed,
        mode: spec.mode,
        oracle,
        target_variance: oracle.sigma2(),
        empirical_variance: variance(&scaled),
        standardized_mean: mean(&z),
        standardized_variance: variance(&z),
        ks_distance: ks_distance(&mut sorted, phi_cdf),
        ks_critical: ks_critical(KS_ALPHA, z.len()),
        coverage,
        left_tail_ks: left_ks,
        left_tail_count: nl,
        left_tail_critical: ks_critical(KS_ALPHA, nl.max(1)),
        right_tail_ks: right_ks,
        right_tail_count: nr,
        right_tail_critical: ks_critical(KS_ALPHA, nr.max(1)),
        plugin_coverage: None,
        efficiency: None,
        standardized_values: z,
    }
}

/// Draws `replicates` samples, standardizes each `H_pn` with the oracle
/// constants and compares the result with the standard normal.
pub fn run_scenario(spec: &ScenarioSpec, workers: usize) -> Result<SimulationReport> {
    spec.validate()?;
    let oracle = scenario_oracle(spec)?;
    if oracle.sigma2().is_none() {
        return Err(Error::NoOracle(format!(
            "a two-sided density at the quantile of {} (one-sided derivatives differ; use the onesided mode)",
            spec.distribution
        )));
    }
    let values = estimates(spec, workers)?;
    Ok(build_report(spec, oracle, &values))
}

/// Like [`run_scenario`], but accepts distinct one-sided derivatives and
/// judges each tail separately (`left_tail_ks`, `right_tail_ks`).
pub fn run_onesided(spec: &ScenarioSpec, workers: usize) -> Result<SimulationReport> {
    spec.validate()?;
    check_kink(spec)?;
    let oracle = scenario_oracle(spec)?;
    let values = estimates(spec, workers)?;
    Ok(build_report(spec, oracle, &values))
}

/// Analytic efficiency `f(mu)^2 zeta1 / zeta` for mean kernels under a
/// symmetric scalar distribution, using `zeta1 = Var(x) / m^2`.
fn analytic_efficiency(spec: &ScenarioSpec, oracle: &OracleConstants) -> Option<f64> {
    let m = match spec.kernel {
        KernelSpec::Walsh => 2,
        KernelSpec::Mean(m) => m,
        KernelSpec::Distance(_) => return None,
    };
    spec.distribution.symmetry_center()?;
    let zeta1 = spec.distribution.variance()? / (m * m) as f64;
    oracle.sigma2()?;
    let f = oracle.left_derivative;
    Some(f * f * zeta1 / oracle.zeta)
}

/// Per replicate computes both the median of kernel values and the ordinary
/// U-statistic (their mean) and returns `Var(U_n) / Var(H_pn)`.
pub fn run_efficiency(spec: &ScenarioSpec, workers: usize) -> Result<SimulationReport> {
    spec.validate()?;
    if spec.p != 0.5 {
        return Err(Error::InvalidArgument("efficiency compares medians: p must be 0.5".into()));
    }
    if spec.distribution.is_scalar() && spec.distribution.variance().is_none() {
        return Err(Error::InvalidArgument(format!(
            "{} has no finite variance for the U-statistic arm",
            spec.distribution
        )));
    }
    let oracle = scenario_oracle(spec)?;
    let qs = QuantileSpec::median();
    let engine = EngineConfig::default();
    let pairs: Vec<(f64, f64)> = par_replicates(spec.replicates, workers, |r| {
        let s = spec.sample(r);
        let h = u_quantile(&s, &spec.kernel, qs, Backend::Auto, &engine)?.value;
        let (mut sum, mut count) = (0.0, 0u64);
        for_each_value(&s, &spec.kernel, |v| {
            sum += v;
            count += 1;
        });
        Ok((h, sum / count as f64))
    })?
    .into_iter()
    .collect::<Result<_>>()?;
    let (h, u): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let mut report = build_report(spec, oracle, &h);
    let (var_u, var_h) = (variance(&u), variance(&h));
    report.efficiency = Some(EfficiencyReport {
        variance_ratio: var_u / var_h,
        analytic: analytic_efficiency(spec, &oracle),
        u_statistic_variance: var_u,
        u_quantile_variance: var_h,
    });
    Ok(report)
}

/// Fraction of replicates whose plug-in interval (estimated `zeta`, KDE
/// density) contains the true `H_p`. Replicates refused for a violated
/// hypothesis are counted separately.
pub fn run_coverage(spec: &ScenarioSpec, level: f64, workers: usize) -> Result<SimulationReport> {
    spec.validate()?;
    let oracle = scenario_oracle(spec)?;
    let qs = QuantileSpec::new(spec.p)?;
    let outcomes: Vec<Result<(f64, Option<(f64, f64)>)>> = par_replicates(spec.replicates, workers, |r| {
        let s = spec.sample(r);
        let cfg = AsymptoticConfig {
            seed: derive_seed(spec.master_seed, r as u64),
            ..AsymptoticConfig::default()
        };
        match asymptotic_summary(&s, &spec.kernel, qs, level, &cfg) {
            Ok(sum) => Ok((sum.point, Some((sum.ci_lower, sum.ci_upper)))),
            Err(Error::Hypothesis { .. } | Error::Degenerate(_)) => {
                let est = u_quantile(&s, &spec.kernel, qs, Backend::Auto, &cfg.engine)?;
                Ok((est.value, None))
            }
            Err(e) => Err(e),
        }
    })?;
    let outcomes: Vec<(f64, Option<(f64, f64)>)> = outcomes.into_iter().collect::<Result<_>>()?;
    let truth = oracle.quantile;
    let intervals: Vec<(f64, f64)> = outcomes.iter().filter_map(|o| o.1).collect();
    let refusals = outcomes.len() - intervals.len();
    let covered = intervals.iter().filter(|(lo, hi)| *lo <= truth && truth <= *hi).count();
    let evaluated = intervals.len().max(1) as f64;
    let values: Vec<f64> = outcomes.iter().map(|o| o.0).collect();
    check_kink(spec)?;
    let mut report = build_report(spec, oracle, &values);
    report.plugin_coverage = Some(CoverageReport {
        level,
        coverage: covered as f64 / evaluated,
        refusals,
        mean_ci_width: intervals.iter().map(|(lo, hi)| hi - lo).sum::<f64>() / evaluated,
    });
    Ok(report)
}

/// Dispatches on `spec.mode`.
pub fn run(spec: &ScenarioSpec, workers: usize) -> Result<SimulationReport> {
    match spec.mode {
        ScenarioMode::Limit => run_scenario(spec, workers),
        ScenarioMode::Onesided => run_onesided(spec, workers),
        ScenarioMode::Efficiency => run_efficiency(spec, workers),
        ScenarioMode::Coverage => run_coverage(spec, spec.level, workers),
    }
}
