//! Enumeration, counting and selection over the `C(n, m)` kernel values
//! `h(x_{i1}, ..., x_{im})`, `i1 < ... < im`.
//!
//! The empirical quantile follows the `inf { x : F_N(x) >= p }` convention:
//! the estimate is the `k`-th smallest of the `N` kernel values with
//! `k = ceil(p * N)` (the floating-point product, clamped to `1..=N`). For
//! `p = 1/2` and even `N` this is the lower median, not the midpoint of the
//! two central values that classical Hodges-Lehmann implementations report.
//!
//! Two backends compute the same order statistic:
//!
//! * `Exact` materializes every kernel value (up to a cap) and selects.
//! * `Fast` applies to degree-2 scalar kernels with a [`PairOrder`]. It sorts
//!   the sample once, counts pairs below a threshold in linear time, and
//!   bisects over the ordered bit patterns of `f64` for the smallest value
//!   whose count reaches `k`. That value is always a realized kernel value,
//!   so both backends agree bit-for-bit.

use serde::{Deserialize, Serialize};

use crate::kernels::{Kernel, PairOrder};
use crate::{Error, Result, Sample};

/// Default cap on the number of kernel values the exact backend materializes.
pub const DEFAULT_MATERIALIZATION_CAP: u64 = 50_000_000;

/// A quantile level `p` in the open interval `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct QuantileSpec(f64);

impl QuantileSpec {
    pub fn new(p: f64) -> Result<Self> {
        if p > 0.0 && p < 1.0 {
            Ok(QuantileSpec(p))
        } else {
            Err(Error::InvalidArgument(format!(
                "quantile level must lie strictly between 0 and 1, got {p}"
            )))
        }
    }

    pub fn median() -> Self {
        QuantileSpec(0.5)
    }

    pub fn p(self) -> f64 {
        self.0
    }

    /// Rank `k = ceil(p * N)` of the selected order statistic, in `1..=N`.
    pub fn rank(self, total: u64) -> u64 {
        let k = (self.0 * total as f64).ceil() as u64;
        k.clamp(1, total.max(1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Exact,
    Fast,
    /// `Fast` when the kernel supports it, otherwise `Exact`.
    #[default]
    Auto,
}

impl std::str::FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Backend::Exact),
            "fast" => Ok(Backend::Fast),
            "auto" => Ok(Backend::Auto),
            other => Err(Error::InvalidArgument(format!(
                "unknown backend `{other}` (expected exact, fast or auto)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EngineConfig {
    pub materialization_cap: u64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            materialization_cap: DEFAULT_MATERIALIZATION_CAP,
        }
    }
}

/// The sample p-quantile of the kernel values plus bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UQuantileEstimate {
    pub value: f64,
    /// `N = C(n, m)`.
    pub total_count: u64,
    /// `k = ceil(p * N)`.
    pub selected_rank: u64,
    /// Number of kernel values exactly equal to `value`.
    pub tie_count: u64,
}

/// `C(n, m)`, or `None` on `u128` overflow.
pub fn binomial(n: u64, m: u64) -> Option<u128> {
    if m > n {
        return Some(0);
    }
    let m = m.min(n - m);
    let mut acc: u128 = 1;
    for i in 0..m {
        // acc * (n - i) / (i + 1) stays integral at every step
        acc = acc.checked_mul((n - i) as u128)? / (i + 1) as u128;
    }
    Some(acc)
}

pub(crate) fn check_sample(sample: &Sample, kernel: &dyn Kernel) -> Result<()> {
    let m = kernel.degree();
    if sample.len() < m || sample.is_empty() {
        return Err(Error::TooFewPoints { n: sample.len(), m });
    }
    kernel.check_dim(sample.dim())
}

/// Advances `idx` to the next strictly increasing tuple over `0..n` in
/// lexicographic order. Returns `false` after the last tuple.
pub(crate) fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let m = idx.len();
    let mut pos = m;
    while pos > 0 {
        pos -= 1;
        if idx[pos] < n - m + pos {
            idx[pos] += 1;
            for q in pos + 1..m {
                idx[q] = idx[q - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Calls `visit` with every kernel value, in lexicographic tuple order.
pub(crate) fn for_each_value(sample: &Sample, kernel: &dyn Kernel, mut visit: impl FnMut(f64)) {
    let m = kernel.degree();
    let n = sample.len();
    if m == 2 {
        for i in 0..n {
            let xi = sample.point(i);
            for j in i + 1..n {
                visit(kernel.evaluate(&[xi, sample.point(j)]));
            }
        }
        return;
    }
    let mut idx: Vec<usize> = (0..m).collect();
    let mut buf: Vec<&[f64]> = idx.iter().map(|&i| sample.point(i)).collect();
    loop {
        for (slot, &i) in buf.iter_mut().zip(&idx) {
            *slot = sample.point(i);
        }
        visit(kernel.evaluate(&buf));
        if !next_combination(&mut idx, n) {
            break;
        }
    }
}

/// All `C(n, m)` kernel values, one per strictly increasing index tuple, in
/// lexicographic tuple order.
pub fn enumerate_kernel_values(
    sample: &Sample,
    kernel: &dyn Kernel,
    config: &EngineConfig,
) -> Result<Vec<f64>> {
    check_sample(sample, kernel)?;
    let count = binomial(sample.len() as u64, kernel.degree() as u64).unwrap_or(u128::MAX);
    if count > config.materialization_cap as u128 {
        return Err(Error::CapExceeded {
            count,
            cap: config.materialization_cap,
        });
    }
    let mut out = Vec::with_capacity(count as usize);
    for_each_value(sample, kernel, |v| out.push(v));
    Ok(out)
}

/// Ascending copy of a scalar sample.
fn sorted_scalars(sample: &Sample) -> Vec<f64> {
    let mut xs = sample.coords().to_vec();
    xs.sort_unstable_by(f64::total_cmp);
    xs
}

/// Counts pairs `i < j` of sorted `xs` whose kernel value satisfies `keep`,
/// where `keep` is a downward-closed predicate (`v <= t` or `v < t`).
fn count_sorted_pairs(xs: &[f64], order: PairOrder, keep: impl Fn(f64) -> bool) -> u64 {
    let n = xs.len();
    let mut count = 0u64;
    match order {
        PairOrder::Midpoint => {
            // largest partner index for row i only shrinks as i grows
            let mut end = n;
            for i in 0..n {
                while end > i + 1 && !keep((xs[i] + xs[end - 1]) / 2.0) {
                    end -= 1;
                }
                if end <= i + 1 {
                    break;
                }
                count += (end - i - 1) as u64;
            }
        }
        PairOrder::AbsDifference => {
            let mut lo = 0;
            for j in 0..n {
                while lo < j && !keep((xs[j] - xs[lo]).abs()) {
                    lo += 1;
                }
                count += (j - lo) as u64;
            }
        }
    }
    count
}

/// Number of index tuples whose kernel value is `<= threshold`.
///
/// Degree-2 kernels with a [`PairOrder`] are counted in `O(n log n)`; all
/// others by streaming enumeration (no materialization).
pub fn count_leq(sample: &Sample, kernel: &dyn Kernel, threshold: f64) -> Result<u64> {
    check_sample(sample, kernel)?;
    if let Some(order) = kernel.pair_order(sample.dim()) {
        let xs = sorted_scalars(sample);
        return Ok(count_sorted_pairs(&xs, order, |v| v <= threshold));
    }
    let mut count = 0u64;
    for_each_value(sample, kernel, |v| count += (v <= threshold) as u64);
    Ok(count)
}

/// Number of index tuples whose kernel value is `< threshold`.
pub fn count_less(sample: &Sample, kernel: &dyn Kernel, threshold: f64) -> Result<u64> {
    check_sample(sample, kernel)?;
    if let Some(order) = kernel.pair_order(sample.dim()) {
        let xs = sorted_scalars(sample);
        return Ok(count_sorted_pairs(&xs, order, |v| v < threshold));
    }
    let mut count = 0u64;
    for_each_value(sample, kernel, |v| count += (v < threshold) as u64);
    Ok(count)
}

/// Maps an `f64` to an integer key with the same total order.
fn order_key(x: f64) -> i64 {
    let bits = x.to_bits() as i64;
    if bits < 0 {
        bits ^ i64::MAX
    } else {
        bits
    }
}

fn from_order_key(key: i64) -> f64 {
    let bits = if key < 0 { key ^ i64::MAX } else { key };
    f64::from_bits(bits as u64)
}

/// The sample p-quantile of the kernel values.
pub fn u_quantile(
    sample: &Sample,
    kernel: &dyn Kernel,
    spec: QuantileSpec,
    backend: Backend,
    config: &EngineConfig,
) -> Result<UQuantileEstimate> {
    check_sample(sample, kernel)?;
    let fast = kernel.pair_order(sample.dim());
    match (backend, fast) {
        (Backend::Fast, None) => Err(Error::NoFastPath(kernel.name())),
        (Backend::Fast | Backend::Auto, Some(order)) => Ok(select_pairs(sample, order, spec)),
        (Backend::Exact, _) | (Backend::Auto, None) => {
            let mut values = enumerate_kernel_values(sample, kernel, config)?;
            Ok(select_materialized(&mut values, spec))
        }
    }
}

/// Order statistic of materialized kernel values. Reorders `values`.
pub(crate) fn select_materialized(values: &mut [f64], spec: QuantileSpec) -> UQuantileEstimate {
    let total = values.len() as u64;
    let k = spec.rank(total);
    let (_, kth, _) = values.select_nth_unstable_by((k - 1) as usize, f64::total_cmp);
    // +0.0 folds a negative zero into the canonical zero
    let value = *kth + 0.0;
    let tie_count = values.iter().filter(|&&v| v == value).count() as u64;
    UQuantileEstimate {
        value,
        total_count: total,
        selected_rank: k,
        tie_count,
    }
}

/// Fast-path selection for degree-2 scalar kernels with a [`PairOrder`]
/// (Walsh averages, one-dimensional distances).
pub fn u_quantile_fast_pairsum(
    sample: &Sample,
    kernel: &dyn Kernel,
    spec: QuantileSpec,
) -> Result<UQuantileEstimate> {
    if sample.len() < 2 {
        return Err(Error::TooFewPoints { n: sample.len(), m: 2 });
    }
    check_sample(sample, kernel)?;
    let order = kernel
        .pair_order(sample.dim())
        .ok_or_else(|| Error::NoFastPath(kernel.name()))?;
    Ok(select_pairs(sample, order, spec))
}

fn select_pairs(sample: &Sample, order: PairOrder, spec: QuantileSpec) -> UQuantileEstimate {
    let xs = sorted_scalars(sample);
    let n = xs.len();
    let total = (n as u64) * (n as u64 - 1) / 2;
    let k = spec.rank(total);

    let (min, max) = match order {
        PairOrder::Midpoint => ((xs[0] + xs[1]) / 2.0, (xs[n - 2] + xs[n - 1]) / 2.0),
        PairOrder::AbsDifference => (-0.0, (xs[n - 1] - xs[0]).abs()),
    };
    // smallest key whose count reaches k; count(max) = N >= k
    let (mut lo, mut hi) = (order_key(min), order_key(max));
    while lo < hi {
        let mid = ((lo as i128 + hi as i128) >> 1) as i64;
        let t = from_order_key(mid);
        if count_sorted_pairs(&xs, order, |v| v <= t) >= k {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let value = from_order_key(lo) + 0.0;
    let leq = count_sorted_pairs(&xs, order, |v| v <= value);
    let less = count_sorted_pairs(&xs, order, |v| v < value);
    UQuantileEstimate {
        value,
        total_count: total,
        selected_rank: k,
        tie_count: leq - less,
    }
}
