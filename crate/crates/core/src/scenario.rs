//! Plain-text scenario files.
//!
//! One `key = value` pair per line; blank lines and `#` comments are ignored.
//!
//! | key            | required | value                                               |
//! |----------------|----------|-----------------------------------------------------|
//! | `distribution` | yes      | e.g. `normal(0,1)`, `uniform(0,1)`, `splitnormal(1,2)`, `square`, `cube(3)`, `mvnormal(2)` |
//! | `kernel`       | yes      | `walsh`, `mean:<m>`, `dist:<euclidean\|manhattan\|chebyshev>` |
//! | `n`            | yes      | sample size                                         |
//! | `replicates`   | yes      | number of replicates, at least 1                    |
//! | `p`            | no       | quantile level, default `0.5`                       |
//! | `seed`         | no       | master seed, default [`DEFAULT_SCENARIO_SEED`]      |
//! | `mode`         | no       | `limit` (default), `onesided`, `efficiency`, `coverage` |
//! | `level`        | no       | confidence level, default `0.95`                    |

use std::collections::BTreeMap;

use crate::montecarlo::{ScenarioMode, ScenarioSpec};
use crate::{Error, Result};

pub const DEFAULT_SCENARIO_SEED: u64 = 20_090_101;

const KEYS: [&str; 8] = ["distribution", "kernel", "n", "replicates", "p", "seed", "mode", "level"];

pub fn parse_scenario(text: &str) -> Result<ScenarioSpec> {
    let mut entries: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
    let mut unknown = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: line_no,
            message: format!("expected `key = value`, found `{line}`"),
        })?;
        let key = key.trim();
        let value = value.trim();
        if !KEYS.contains(&key) {
            unknown.push(key.to_string());
            continue;
        }
        if entries.insert(key, (line_no, value)).is_some() {
            return Err(Error::Parse {
                line: line_no,
                message: format!("duplicate key `{key}`"),
            });
        }
    }
    if !unknown.is_empty() {
        return Err(Error::UnknownKeys(unknown));
    }

    fn field<T: std::str::FromStr>(entries: &BTreeMap<&str, (usize, &str)>, key: &str) -> Result<Option<T>> {
        match entries.get(key) {
            None => Ok(None),
            Some(&(line, value)) => value.parse::<T>().map(Some).map_err(|_| Error::Parse {
                line,
                message: format!("invalid value `{value}` for `{key}`"),
            }),
        }
    }
    let required = |key: &str| Error::Parse {
        line: 0,
        message: format!("missing required key `{key}`"),
    };

    let spec = ScenarioSpec {
        distribution: field(&entries, "distribution")?.ok_or_else(|| required("distribution"))?,
        kernel: field(&entries, "kernel")?.ok_or_else(|| required("kernel"))?,
        n: field(&entries, "n")?.ok_or_else(|| required("n"))?,
        replicates: field(&entries, "replicates")?.ok_or_else(|| required("replicates"))?,
        p: field(&entries, "p")?.unwrap_or(0.5),
        master_seed: field(&entries, "seed")?.unwrap_or(DEFAULT_SCENARIO_SEED),
        mode: field::<ScenarioMode>(&entries, "mode")?.unwrap_or_default(),
        level: field(&entries, "level")?.unwrap_or(0.95),
    };
    spec.validate()?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::DistributionSpec;
    use crate::kernels::KernelSpec;

    #[test]
    fn parses_full_file() {
        let text = "# pairwise averages\ndistribution = normal(0,1)\nkernel = walsh\n\nn = 200\nreplicates = 2000 # enough\nseed = 7\nmode = coverage\nlevel = 0.9\np=0.5\n";
        let spec = parse_scenario(text).unwrap();
        assert_eq!(spec.distribution, DistributionSpec::standard_normal());
        assert_eq!(spec.kernel, KernelSpec::Walsh);
        assert_eq!((spec.n, spec.replicates, spec.master_seed), (200, 2000, 7));
        assert_eq!(spec.mode, ScenarioMode::Coverage);
        assert_eq!(spec.level, 0.9);
    }

    #[test]
    fn defaults() {
        let spec = parse_scenario("distribution = square\nkernel = dist:euclidean\nn = 50\nreplicates = 10").unwrap();
        assert_eq!(spec.p, 0.5);
        assert_eq!(spec.master_seed, DEFAULT_SCENARIO_SEED);
        assert_eq!(spec.mode, ScenarioMode::Limit);
    }

    #[test]
    fn rejects_unknown_keys_listing_all() {
        let err = parse_scenario("distribution = normal\nkernel = walsh\nn = 5\nreplicates = 1\nworkers = 3\nalpha = 1").unwrap_err();
        assert_eq!(err, Error::UnknownKeys(vec!["workers".into(), "alpha".into()]));
    }

    #[test]
    fn rejects_bad_files() {
        let base = "distribution = normal\nkernel = walsh\nn = 5\n";
        assert!(parse_scenario(&format!("{base}replicates = 0")).is_err());
        assert!(parse_scenario(base).is_err());
        assert!(matches!(
            parse_scenario(&format!("{base}replicates = ten")),
            Err(Error::Parse { line: 4, .. })
        ));
        assert!(parse_scenario(&format!("{base}replicates = 1\nn = 6")).is_err());
        assert!(parse_scenario(&format!("{base}replicates = 1\njunk line")).is_err());
        assert!(parse_scenario(&format!("{base}replicates = 1\np = 1")).is_err());
    }
}
