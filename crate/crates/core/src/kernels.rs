//! Symmetric kernels `h: (R^d)^m -> R`.
//!
//! Every downstream computation sees a kernel only through the [`Kernel`]
//! trait. The built-in kernels are the pairwise average (Walsh average), the
//! m-wise mean and interpoint distances under three norms; user kernels plug
//! in by implementing [`Kernel`] or wrapping a closure in [`FnKernel`].
//!
//! Symmetry is a contract: `evaluate` must return the same bits under every
//! permutation of its arguments. The built-ins are written in
//! order-insensitive form so this holds exactly, which the enumerating and
//! counting backends rely on to agree bit-for-bit.

use std::fmt;
use std::str::FromStr;

use crate::{Error, Result};

/// Monotone structure of a degree-2 scalar kernel that lets the engine count
/// and select over all pairs after a single sort, without enumerating them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairOrder {
    /// `h(x, y) = (x + y) / 2`; nondecreasing in both arguments.
    Midpoint,
    /// `h(x, y) = |x - y|`; on sorted data, nondecreasing in the later index.
    AbsDifference,
}

pub trait Kernel: Send + Sync {
    /// Number of points the kernel takes (`m`).
    fn degree(&self) -> usize;

    fn name(&self) -> String;

    /// Rejects point dimensions the kernel is not defined on.
    fn check_dim(&self, dim: usize) -> Result<()>;

    /// Evaluates the kernel on exactly `degree()` points of a dimension that
    /// passed [`Kernel::check_dim`]. Must be symmetric and deterministic.
    fn evaluate(&self, points: &[&[f64]]) -> f64;

    /// Fast pairwise structure available for samples of the given dimension.
    fn pair_order(&self, _dim: usize) -> Option<PairOrder> {
        None
    }

    /// Validating wrapper around [`Kernel::evaluate`].
    fn evaluate_checked(&self, points: &[&[f64]]) -> Result<f64> {
        if points.len() != self.degree() {
            return Err(Error::InvalidArgument(format!(
                "kernel `{}` takes {} points, got {}",
                self.name(),
                self.degree(),
                points.len()
            )));
        }
        let dim = points.first().map_or(0, |p| p.len());
        if points.iter().any(|p| p.len() != dim) {
            return Err(Error::InvalidArgument("points have mixed dimensions".into()));
        }
        self.check_dim(dim)?;
        Ok(self.evaluate(points))
    }
}

/// Norm used by the distance kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Norm {
    Euclidean,
    Manhattan,
    Chebyshev,
}

impl Norm {
    pub const ALL: [Norm; 3] = [Norm::Euclidean, Norm::Manhattan, Norm::Chebyshev];

    /// `||x - y||`. Exactly symmetric in `x` and `y`; in one dimension every
    /// norm reduces to `|x - y|`.
    pub fn distance(self, x: &[f64], y: &[f64]) -> f64 {
        if x.len() == 1 {
            return (x[0] - y[0]).abs();
        }
        let diffs = x.iter().zip(y).map(|(a, b)| (a - b).abs());
        match self {
            Norm::Euclidean => diffs.map(|d| d * d).sum::<f64>().sqrt(),
            Norm::Manhattan => diffs.sum(),
            Norm::Chebyshev => diffs.fold(0.0, f64::max),
        }
    }

    /// Lebesgue volume of the closed unit ball in `R^d`.
    pub fn unit_ball_volume(self, d: usize) -> f64 {
        let df = d as f64;
        match self {
            Norm::Euclidean => {
                std::f64::consts::PI.powf(df / 2.0) / statrs::function::gamma::gamma(df / 2.0 + 1.0)
            }
            Norm::Manhattan => 2f64.powi(d as i32) / statrs::function::factorial::factorial(d as u64),
            Norm::Chebyshev => 2f64.powi(d as i32),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Norm::Euclidean => "euclidean",
            Norm::Manhattan => "manhattan",
            Norm::Chebyshev => "chebyshev",
        }
    }
}

impl FromStr for Norm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" | "l2" => Ok(Norm::Euclidean),
            "manhattan" | "l1" => Ok(Norm::Manhattan),
            "chebyshev" | "linf" | "max" => Ok(Norm::Chebyshev),
            other => Err(Error::UnknownKernel(format!("dist:{other}"))),
        }
    }
}

/// The built-in kernels, selectable by name (`walsh`, `mean:<m>`,
/// `dist:<norm>`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelSpec {
    /// `(x + y) / 2` on scalars.
    Walsh,
    /// Arithmetic mean of `m` scalars. `Mean(1)` is the identity kernel.
    Mean(usize),
    /// `||x - y||` on `d`-vectors.
    Distance(Norm),
}

pub fn walsh_average_kernel() -> KernelSpec {
    KernelSpec::Walsh
}

pub fn mwise_mean_kernel(m: usize) -> Result<KernelSpec> {
    if m == 0 {
        return Err(Error::InvalidArgument("mean kernel degree must be at least 1".into()));
    }
    Ok(KernelSpec::Mean(m))
}

pub fn distance_kernel(norm: Norm) -> KernelSpec {
    KernelSpec::Distance(norm)
}

fn require_scalar(name: &KernelSpec, dim: usize) -> Result<()> {
    if dim == 1 {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            kernel: name.to_string(),
            expected: "1".into(),
            got: dim,
        })
    }
}

/// Mean of the first coordinates, summed in ascending order so the result
/// does not depend on argument order.
fn sorted_mean(points: &[&[f64]]) -> f64 {
    let m = points.len();
    let sum = if m <= 8 {
        let mut buf = [0.0f64; 8];
        for (slot, p) in buf.iter_mut().zip(points) {
            *slot = p[0];
        }
        let vals = &mut buf[..m];
        vals.sort_unstable_by(f64::total_cmp);
        vals.iter().sum::<f64>()
    } else {
        let mut vals: Vec<f64> = points.iter().map(|p| p[0]).collect();
        vals.sort_unstable_by(f64::total_cmp);
        vals.iter().sum::<f64>()
    };
    sum / m as f64
}

impl Kernel for KernelSpec {
    fn degree(&self) -> usize {
        match *self {
            KernelSpec::Walsh | KernelSpec::Distance(_) => 2,
            KernelSpec::Mean(m) => m,
        }
    }

    fn name(&self) -> String {
        self.to_string()
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        match self {
            KernelSpec::Walsh | KernelSpec::Mean(_) => require_scalar(self, dim),
            KernelSpec::Distance(_) if dim >= 1 => Ok(()),
            KernelSpec::Distance(_) => Err(Error::DimensionMismatch {
                kernel: self.to_string(),
                expected: ">= 1".into(),
                got: dim,
            }),
        }
    }

    #[inline]
    fn evaluate(&self, points: &[&[f64]]) -> f64 {
        match *self {
            KernelSpec::Walsh => (points[0][0] + points[1][0]) / 2.0,
            KernelSpec::Mean(1) => points[0][0],
            KernelSpec::Mean(2) => (points[0][0] + points[1][0]) / 2.0,
            KernelSpec::Mean(_) => sorted_mean(points),
            KernelSpec::Distance(norm) => norm.distance(points[0], points[1]),
        }
    }

    fn pair_order(&self, dim: usize) -> Option<PairOrder> {
        match *self {
            KernelSpec::Walsh | KernelSpec::Mean(2) if dim == 1 => Some(PairOrder::Midpoint),
            KernelSpec::Distance(_) if dim == 1 => Some(PairOrder::AbsDifference),
            _ => None,
        }
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelSpec::Walsh => f.write_str("walsh"),
            KernelSpec::Mean(m) => write!(f, "mean:{m}"),
            KernelSpec::Distance(norm) => write!(f, "dist:{}", norm.as_str()),
        }
    }
}

impl FromStr for KernelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "walsh" {
            return Ok(KernelSpec::Walsh);
        }
        if let Some(m) = s.strip_prefix("mean:") {
            let m: usize = m.parse().map_err(|_| Error::UnknownKernel(s.to_string()))?;
            return mwise_mean_kernel(m);
        }
        if let Some(norm) = s.strip_prefix("dist:") {
            return norm
                .parse::<Norm>()
                .map(KernelSpec::Distance)
                .map_err(|_| Error::UnknownKernel(s.to_string()));
        }
        Err(Error::UnknownKernel(s.to_string()))
    }
}

/// A user-supplied kernel backed by a closure. Symmetry is the caller's
/// responsibility; [`is_symmetric_on`] checks it on given arguments.
pub struct FnKernel<F> {
    name: String,
    degree: usize,
    dim: Option<usize>,
    f: F,
}

impl<F> FnKernel<F>
where
    F: Fn(&[&[f64]]) -> f64 + Send + Sync,
{
    /// `dim = None` accepts points of any dimension.
    pub fn new(name: impl Into<String>, degree: usize, dim: Option<usize>, f: F) -> Result<Self> {
        if degree == 0 {
            return Err(Error::InvalidArgument("kernel degree must be at least 1".into()));
        }
        Ok(FnKernel {
            name: name.into(),
            degree,
            dim,
            f,
        })
    }
}

impl<F> Kernel for FnKernel<F>
where
    F: Fn(&[&[f64]]) -> f64 + Send + Sync,
{
    fn degree(&self) -> usize {
        self.degree
    }

    fn name(&self) -> String {
        self.name.clone()
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        match self.dim {
            Some(d) if d != dim => Err(Error::DimensionMismatch {
                kernel: self.name.clone(),
                expected: d.to_string(),
                got: dim,
            }),
            _ => Ok(()),
        }
    }

    fn evaluate(&self, points: &[&[f64]]) -> f64 {
        (self.f)(points)
    }
}

/// Evaluates `kernel` on every permutation of `points` and reports whether all
/// results are bit-identical.
pub fn is_symmetric_on(kernel: &dyn Kernel, points: &[&[f64]]) -> bool {
    let reference = kernel.evaluate(points).to_bits();
    let mut perm: Vec<&[f64]> = points.to_vec();
    let mut ok = true;
    heap_permutations(&mut perm, points.len(), &mut |p| {
        ok &= kernel.evaluate(p).to_bits() == reference;
    });
    ok
}

fn heap_permutations<'a>(items: &mut Vec<&'a [f64]>, k: usize, visit: &mut dyn FnMut(&[&'a [f64]])) {
    if k <= 1 {
        visit(items);
        return;
    }
    for i in 0..k {
        heap_permutations(items, k - 1, visit);
        if k % 2 == 0 {
            items.swap(i, k - 1);
        } else {
            items.swap(0, k - 1);
        }
    }
}
