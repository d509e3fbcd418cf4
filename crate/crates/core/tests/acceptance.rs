//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use rand::Rng;
use uquantile::asymptotics::{unit_square_distance_cdf, unit_square_zeta, zeta_plugin, AsymptoticConfig};
use uquantile::distributions::DistributionSpec;
use uquantile::engine::{u_quantile, Backend, EngineConfig, QuantileSpec};
use uquantile::montecarlo::{run_coverage, run_efficiency, run_onesided, run_scenario, ScenarioMode, ScenarioSpec};
use uquantile::report::values_csv;
use uquantile::rng::stream_rng;
use uquantile::stats::{ks_critical, mean, variance};
use uquantile::{KernelSpec, Norm, Result, Sample};

const SEED: u64 = 20_090_101;
const KS_ALPHA: f64 = 0.01;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn normal() -> DistributionSpec {
    DistributionSpec::standard_normal()
}

fn square() -> DistributionSpec {
    DistributionSpec::UnitCube { dim: 2 }
}

fn hl_scenario() -> ScenarioSpec {
    ScenarioSpec::new(normal(), KernelSpec::Walsh, 0.5, 200, 2000, SEED)
}

fn interpoint_scenario() -> ScenarioSpec {
    ScenarioSpec::new(square(), KernelSpec::Distance(Norm::Euclidean), 0.5, 100, 2000, SEED + 1)
}

fn mean_check(values: &[f64]) -> (bool, f64, f64) {
    let m = mean(values);
    let bound = 3.0 / (values.len() as f64).sqrt() * variance(values).sqrt();
    (m.abs() <= bound, m, bound)
}

fn hl_variance() -> Result<Outcome> {
    let r = run_scenario(&hl_scenario(), 0)?;
    let target = PI / 3.0;
    let (mean_ok, m, bound) = mean_check(&r.standardized_values);
    outcome(
        (r.empirical_variance - target).abs() <= 0.15 * target && mean_ok,
        format!(
            "Var(sqrt(n) H) = {:.4}, target {target:.4} +/- 15% [{:.4}, {:.4}]; standardized mean {m:.4} (|.| <= {bound:.4})",
            r.empirical_variance,
            0.85 * target,
            1.15 * target
        ),
    )
}

fn zeta_one_twelfth() -> Result<Outcome> {
    let cfg = AsymptoticConfig::default();
    let mut hits = 0;
    let mut worst: f64 = 0.0;
    for seed in 0..20u64 {
        let sample = normal().sample(&mut stream_rng(SEED + 100 + seed, 0), 500);
        let z = zeta_plugin(&sample, &KernelSpec::Walsh, QuantileSpec::median(), &cfg)?;
        let err = (z.value - 1.0 / 12.0).abs();
        worst = worst.max(err);
        hits += (err <= 0.01) as usize;
    }
    outcome(hits >= 18, format!("{hits}/20 seeds within 0.01 of 1/12 (need 18); largest error {worst:.4}"))
}

fn normality() -> Result<Outcome> {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, spec) in [("walsh/normal n=200", hl_scenario()), ("distance/unit square n=100", interpoint_scenario())] {
        let r = run_scenario(&spec, 0)?;
        let crit = ks_critical(KS_ALPHA, spec.replicates);
        let (mean_ok, m, bound) = mean_check(&r.standardized_values);
        pass &= r.ks_distance < crit && mean_ok;
        parts.push(format!(
            "{name}: KS {:.4} < {crit:.4}, mean {m:.4} (|.| <= {bound:.4})",
            r.ks_distance
        ));
    }
    outcome(pass, parts.join("; "))
}

fn onesided() -> Result<Outcome> {
    let dist = DistributionSpec::SplitNormal { left: 1.0, right: 2.0 };
    let (left, right) = dist.one_sided_density(0.0);
    let mut spec = ScenarioSpec::new(dist, KernelSpec::Mean(1), 0.5, 400, 2000, SEED + 3);
    spec.mode = ScenarioMode::Onesided;
    let r = run_onesided(&spec, 0)?;
    let lc = ks_critical(KS_ALPHA, r.left_tail_count);
    let rc = ks_critical(KS_ALPHA, r.right_tail_count);
    let (mean_ok, m, bound) = mean_check(&r.standardized_values);
    outcome(
        (left - 2.0 * right).abs() < 1e-15 && r.left_tail_ks < lc && r.right_tail_ks < rc && mean_ok,
        format!(
            "F'(-) = {left:.4} = 2 F'(+); left tail KS {:.4} < {lc:.4} ({} values), right tail KS {:.4} < {rc:.4} ({} values); mean {m:.4} (|.| <= {bound:.4})",
            r.left_tail_ks, r.left_tail_count, r.right_tail_ks, r.right_tail_count
        ),
    )
}

/// Ordinary sample quantile at `p = tenths / 10`: the smallest order
/// statistic `x_(k)` with `k / n >= p`, using integer arithmetic.
fn classical_quantile(xs: &[f64], tenths: usize) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let k = ((tenths * v.len()).div_ceil(10)).max(1);
    v[k - 1] + 0.0
}

fn identity_reduction() -> Result<Outcome> {
    let mut rng = stream_rng(SEED + 5, 0);
    let identity = KernelSpec::Mean(1);
    let mut mismatches = 0;
    for trial in 0..1000 {
        let n = rng.random_range(1..=50);
        let xs: Vec<f64> = (0..n)
            .map(|_| {
                let x: f64 = rng.random_range(-5.0..5.0);
                if trial % 3 == 0 { x.round() } else { x }
            })
            .collect();
        let tenths = rng.random_range(1..=9);
        let spec = QuantileSpec::new(tenths as f64 / 10.0)?;
        let got = u_quantile(&Sample::scalar(xs.clone())?, &identity, spec, Backend::Auto, &EngineConfig::default())?;
        if got.value.to_bits() != classical_quantile(&xs, tenths).to_bits() {
            mismatches += 1;
        }
    }
    outcome(mismatches == 0, format!("{mismatches} mismatches in 1000 samples"))
}

fn backend_equivalence() -> Result<Outcome> {
    let mut rng = stream_rng(SEED + 6, 0);
    let levels = [0.1, 0.25, 0.5, 0.75, 0.9];
    let engine = EngineConfig::default();
    let mut mismatches = 0;
    for trial in 0..500 {
        let n = rng.random_range(2..=60);
        let xs: Vec<f64> = (0..n)
            .map(|_| {
                let x: f64 = rng.random_range(-10.0..10.0);
                if trial % 4 == 0 { (x * 2.0).round() / 2.0 } else { x }
            })
            .collect();
        let sample = Sample::scalar(xs)?;
        let spec = QuantileSpec::new(levels[trial % levels.len()])?;
        let fast = u_quantile(&sample, &KernelSpec::Walsh, spec, Backend::Fast, &engine)?;
        let exact = u_quantile(&sample, &KernelSpec::Walsh, spec, Backend::Exact, &engine)?;
        if fast.value.to_bits() != exact.value.to_bits() || fast != exact {
            mismatches += 1;
        }
    }
    outcome(mismatches == 0, format!("{mismatches} mismatches in 500 samples"))
}

fn efficiency() -> Result<Outcome> {
    let mut spec = ScenarioSpec::new(normal(), KernelSpec::Walsh, 0.5, 200, 3000, SEED + 7);
    spec.mode = ScenarioMode::Efficiency;
    let r = run_efficiency(&spec, 0)?;
    let e = r.efficiency.expect("efficiency report");
    outcome(
        (0.85..=1.06).contains(&e.variance_ratio),
        format!(
            "Var(U_n)/Var(H) = {:.4} in [0.85, 1.06]; analytic 3/pi = {:.4}",
            e.variance_ratio,
            3.0 / PI
        ),
    )
}

fn coverage() -> Result<Outcome> {
    let mut spec = ScenarioSpec::new(normal(), KernelSpec::Walsh, 0.5, 400, 2000, SEED + 8);
    spec.mode = ScenarioMode::Coverage;
    let r = run_coverage(&spec, 0.95, 0)?;
    let c = r.plugin_coverage.expect("coverage report");
    outcome(
        (0.92..=0.97).contains(&c.coverage),
        format!(
            "plug-in 95% coverage {:.4} in [0.92, 0.97] ({} refusals); oracle-constant coverage {:.4}",
            c.coverage, c.refusals, r.coverage
        ),
    )
}

fn cross_oracle() -> Result<Outcome> {
    let cfg = AsymptoticConfig::default();
    let kernel = KernelSpec::Distance(Norm::Euclidean);
    let (n, samples) = (1500, 24);
    let estimates = (0..samples)
        .map(|s| {
            let sample = square().sample(&mut stream_rng(SEED + 9, s), n);
            zeta_plugin(&sample, &kernel, QuantileSpec::median(), &cfg).map(|z| z.value)
        })
        .collect::<Result<Vec<_>>>()?;
    let data = mean(&estimates);
    let data_se = (variance(&estimates) / samples as f64).sqrt();

    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if unit_square_distance_cdf(mid) < 0.5 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (quad, quad_se) = unit_square_zeta(0.5 * (lo + hi), 0.5);
    let combined = (data_se * data_se + quad_se * quad_se).sqrt();
    let gap = (data - quad).abs();
    outcome(
        gap <= 3.0 * combined,
        format!(
            "data route {data:.6} +/- {data_se:.6} ({samples} samples of n={n}), quadrature {quad:.6} +/- {quad_se:.1e}; gap {gap:.6} <= 3 x {combined:.6}"
        ),
    )
}

fn determinism() -> Result<Outcome> {
    let mut pass = true;
    let mut parts = Vec::new();
    let mut onesided = ScenarioSpec::new(
        DistributionSpec::SplitNormal { left: 1.0, right: 2.0 },
        KernelSpec::Mean(1),
        0.5,
        400,
        2000,
        SEED + 3,
    );
    onesided.mode = ScenarioMode::Onesided;
    for (name, spec) in [("walsh/normal", hl_scenario()), ("distance/square", interpoint_scenario()), ("kinked", onesided)] {
        let csv: Vec<String> = [1usize, 2, 4]
            .iter()
            .map(|&w| uquantile::montecarlo::run(&spec, w).map(|r| values_csv(&r.standardized_values)))
            .collect::<Result<_>>()?;
        let same = csv.windows(2).all(|w| w[0] == w[1]);
        pass &= same;
        parts.push(format!("{name}: workers 1/2/4 {}", if same { "identical" } else { "differ" }));
    }
    outcome(pass, parts.join("; "))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Result<Outcome>); 10] = [
        ("1 pairwise-average median asymptotic variance", hl_variance),
        ("2 zeta plug-in near 1/12", zeta_one_twelfth),
        ("3 normality of standardized estimates", normality),
        ("4 one-sided limits at a kink", onesided),
        ("5 identity kernel gives the sample quantile", identity_reduction),
        ("6 fast and exhaustive selection agree", backend_equivalence),
        ("7 relative efficiency 3/pi", efficiency),
        ("8 plug-in interval coverage", coverage),
        ("9 data route and quadrature zeta agree", cross_oracle),
        ("10 determinism across worker counts", determinism),
    ];
    let mut failures = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let (pass, detail) = match check() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        failures += !pass as usize;
        println!(
            "{} criterion {name}: {detail} [{:.1}s]",
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of 10 criteria passed", 10 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
