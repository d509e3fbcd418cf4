use proptest::prelude::*;
use uquantile::distributions::DistributionSpec;
use uquantile::montecarlo::{run, run_scenario, ScenarioMode, ScenarioSpec};
use uquantile::report::{to_canonical_json, values_csv};
use uquantile::{KernelSpec, Norm};

fn scenario_strategy() -> impl Strategy<Value = ScenarioSpec> {
    let dists = prop_oneof![
        Just(DistributionSpec::standard_normal()),
        Just(DistributionSpec::Uniform { a: 0.0, b: 1.0 }),
        Just(DistributionSpec::Laplace { mu: 0.0, scale: 1.0 }),
        Just(DistributionSpec::Logistic { mu: 1.0, scale: 2.0 }),
    ];
    let kernels = prop_oneof![Just(KernelSpec::Walsh), Just(KernelSpec::Mean(1))];
    let modes = prop_oneof![Just(ScenarioMode::Limit), Just(ScenarioMode::Onesided), Just(ScenarioMode::Coverage)];
    (dists, kernels, modes, 5usize..40, 1usize..25, any::<u64>()).prop_map(|(d, k, mode, n, reps, seed)| {
        let mut s = ScenarioSpec::new(d, k, 0.5, n, reps, seed);
        s.mode = mode;
        s
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn reports_are_well_formed_and_worker_independent(spec in scenario_strategy()) {
        let a = run(&spec, 1).unwrap();
        let b = run(&spec, 3).unwrap();
        prop_assert_eq!(values_csv(&a.standardized_values), values_csv(&b.standardized_values));
        prop_assert_eq!(to_canonical_json(&a).unwrap(), to_canonical_json(&b).unwrap());
        prop_assert_eq!(a.standardized_values.len(), spec.replicates);
        prop_assert!((0.0..=1.0).contains(&a.ks_distance));
        prop_assert!((0.0..=1.0).contains(&a.coverage));
        if let Some(c) = &a.plugin_coverage {
            prop_assert!(c.coverage.is_nan() || (0.0..=1.0).contains(&c.coverage));
        }
    }

    #[test]
    fn seed_changes_the_draws(seed in any::<u64>()) {
        let a = run_scenario(&ScenarioSpec::new(DistributionSpec::standard_normal(), KernelSpec::Walsh, 0.5, 20, 5, seed), 1).unwrap();
        let b = run_scenario(&ScenarioSpec::new(DistributionSpec::standard_normal(), KernelSpec::Walsh, 0.5, 20, 5, seed ^ 1), 1).unwrap();
        prop_assert_ne!(a.standardized_values, b.standardized_values);
    }
}

#[test]
fn replicate_prefix_is_stable() {
    // replicate r depends only on (master_seed, r)
    let short = run_scenario(&ScenarioSpec::new(DistributionSpec::standard_normal(), KernelSpec::Walsh, 0.5, 30, 10, 9), 1).unwrap();
    let long = run_scenario(&ScenarioSpec::new(DistributionSpec::standard_normal(), KernelSpec::Walsh, 0.5, 30, 40, 9), 1).unwrap();
    assert_eq!(short.standardized_values[..], long.standardized_values[..10]);
}

#[test]
fn uniform_sample_median_variance() {
    let spec = ScenarioSpec::new(DistributionSpec::Uniform { a: 0.0, b: 1.0 }, KernelSpec::Mean(1), 0.5, 200, 2000, 17);
    let r = run_scenario(&spec, 0).unwrap();
    assert_eq!(r.target_variance, Some(0.25));
    assert!((r.empirical_variance - 0.25).abs() < 0.15 * 0.25, "{}", r.empirical_variance);
}

#[test]
fn manhattan_interpoint_scenario_is_normal() {
    let spec = ScenarioSpec::new(
        DistributionSpec::UnitCube { dim: 2 },
        KernelSpec::Distance(Norm::Manhattan),
        0.5,
        60,
        600,
        23,
    );
    let r = run_scenario(&spec, 0).unwrap();
    assert!(r.ks_distance < r.ks_critical, "{} vs {}", r.ks_distance, r.ks_critical);
    assert!(r.oracle.quantile_se > 0.0 && r.oracle.zeta_se > 0.0);
}

/// KS distance at n = 400 should not exceed the one at n = 50 in at least
/// 8 of 10 seed batches. For the pairwise-average median under the normal
/// the n = 50 distribution is already within Monte Carlo noise of the limit
/// (KS 0.0020 at 200 000 replicates), so the comparison is close to a coin
/// flip and this does not hold.
#[test]
#[ignore = "n = 50 is already indistinguishable from the limit for this estimator"]
fn ks_distance_shrinks_with_n() {
    let mut wins = 0;
    for batch in 0..10u64 {
        let ks = |n| {
            run_scenario(&ScenarioSpec::new(DistributionSpec::standard_normal(), KernelSpec::Walsh, 0.5, n, 2000, 1000 + batch), 0)
                .unwrap()
                .ks_distance
        };
        wins += (ks(400) <= ks(50)) as usize;
    }
    assert!(wins >= 8, "n = 400 closer to the limit in {wins}/10 batches");
}
