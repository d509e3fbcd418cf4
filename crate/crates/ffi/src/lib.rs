//! C ABI for the `uquantile` library.
//!
//! Every function returns a [`UqStatus`]; on failure the message is available
//! from [`uq_last_error_message`] on the same thread. Samples are passed as
//! flat row-major `double` arrays of `n * dim` coordinates. Kernels are opaque
//! [`UqKernel`] handles released with [`uq_kernel_free`].
//!
//! # Safety
//!
//! Pointer arguments must be valid for the duration of the call and
//! out-pointers must point to writable memory. Null pointers are reported as
//! [`UqStatus::NullPointer`] rather than dereferenced.
#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, c_void, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use uquantile::asymptotics::{asymptotic_summary, efficiency, oracle_hl, zeta_plugin, AsymptoticConfig, EfficiencyInput};
use uquantile::distributions::DistributionSpec;
use uquantile::engine::{count_leq, u_quantile, Backend, EngineConfig, QuantileSpec};
use uquantile::kernels::FnKernel;
use uquantile::{Error, Kernel, KernelSpec, Sample};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UqStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    TooFewPoints = 4,
    CapExceeded = 5,
    NoFastPath = 6,
    UnknownKernel = 7,
    /// `zeta > 0` or a positive density at the quantile failed.
    Hypothesis = 8,
    Degenerate = 9,
    NoOracle = 10,
    Parse = 11,
    Io = 12,
    Panic = 13,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UqBackend {
    Exact = 0,
    Fast = 1,
    Auto = 2,
}

impl From<UqBackend> for Backend {
    fn from(b: UqBackend) -> Self {
        match b {
            UqBackend::Exact => Backend::Exact,
            UqBackend::Fast => Backend::Fast,
            UqBackend::Auto => Backend::Auto,
        }
    }
}

/// Opaque kernel handle.
pub struct UqKernel {
    inner: Box<dyn Kernel>,
}

/// Kernel callback: `points` holds `m` pointers to `dim` coordinates each.
/// It may be called concurrently from several threads.
pub type UqKernelFn =
    Option<unsafe extern "C" fn(points: *const *const f64, m: usize, dim: usize, user_data: *mut c_void) -> f64>;

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct UqEstimate {
    pub value: f64,
    pub total_count: u64,
    pub selected_rank: u64,
    pub tie_count: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct UqSummary {
    pub point: f64,
    pub zeta_hat: f64,
    pub density_hat: f64,
    pub std_error: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
    pub confidence_level: f64,
    pub bandwidth: f64,
    pub total_count: u64,
    pub selected_rank: u64,
    pub tie_count: u64,
    pub zeta_subsampled: bool,
    pub density_subsampled: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct UqHlOracle {
    pub center: f64,
    pub zeta: f64,
    pub square_integral: f64,
    pub density_at_center: f64,
    pub sigma2: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> UqStatus {
    match e {
        Error::InvalidArgument(_) => UqStatus::InvalidArgument,
        Error::DimensionMismatch { .. } => UqStatus::DimensionMismatch,
        Error::TooFewPoints { .. } => UqStatus::TooFewPoints,
        Error::CapExceeded { .. } => UqStatus::CapExceeded,
        Error::NoFastPath(_) => UqStatus::NoFastPath,
        Error::UnknownKernel(_) => UqStatus::UnknownKernel,
        Error::Hypothesis { .. } => UqStatus::Hypothesis,
        Error::Degenerate(_) => UqStatus::Degenerate,
        Error::NoOracle(_) => UqStatus::NoOracle,
        Error::Parse { .. } | Error::UnknownKeys(_) => UqStatus::Parse,
        Error::Io(_) => UqStatus::Io,
    }
}

enum Failure {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> UqStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => UqStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_last_error(format!("null pointer: {what}"));
            UqStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_last_error(e.to_string());
            status_of(&e)
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            UqStatus::Panic
        }
    }
}

unsafe fn non_null<'a, T>(ptr: *const T, what: &'static str) -> Result<&'a T, Failure> {
    ptr.as_ref().ok_or(Failure::Null(what))
}

unsafe fn out<'a, T>(ptr: *mut T, what: &'static str) -> Result<&'a mut T, Failure> {
    ptr.as_mut().ok_or(Failure::Null(what))
}

unsafe fn c_str<'a>(ptr: *const c_char, what: &'static str) -> Result<&'a str, Failure> {
    if ptr.is_null() {
        return Err(Failure::Null(what));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| Failure::Lib(Error::InvalidArgument(format!("{what} is not valid UTF-8"))))
}

unsafe fn sample_from(data: *const f64, n: usize, dim: usize) -> Result<Sample, Failure> {
    let len = n
        .checked_mul(dim)
        .ok_or_else(|| Error::InvalidArgument("n * dim overflows".into()))?;
    if len == 0 {
        return Ok(Sample::new(dim.max(1), Vec::new())?);
    }
    if data.is_null() {
        return Err(Failure::Null("data"));
    }
    Ok(Sample::new(dim, std::slice::from_raw_parts(data, len).to_vec())?)
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn uq_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Creates a built-in kernel: `walsh`, `mean:<m>` or
/// `dist:<euclidean|manhattan|chebyshev>`.
#[no_mangle]
pub unsafe extern "C" fn uq_kernel_from_name(name: *const c_char, kernel_out: *mut *mut UqKernel) -> UqStatus {
    guard(|| {
        let slot = out(kernel_out, "kernel_out")?;
        let spec: KernelSpec = c_str(name, "name")?.parse()?;
        *slot = Box::into_raw(Box::new(UqKernel { inner: Box::new(spec) }));
        Ok(())
    })
}

struct Callback {
    f: unsafe extern "C" fn(*const *const f64, usize, usize, *mut c_void) -> f64,
    user_data: *mut c_void,
}

// The caller promises the callback and its user data are thread-safe.
unsafe impl Send for Callback {}
unsafe impl Sync for Callback {}

impl Callback {
    fn call(&self, pts: &[&[f64]]) -> f64 {
        let ptrs: Vec<*const f64> = pts.iter().map(|p| p.as_ptr()).collect();
        let d = pts.first().map_or(0, |p| p.len());
        unsafe { (self.f)(ptrs.as_ptr(), ptrs.len(), d, self.user_data) }
    }
}

/// Wraps a C callback as a symmetric kernel of the given degree. `dim = 0`
/// accepts points of any dimension. `name` may be null.
#[no_mangle]
pub unsafe extern "C" fn uq_kernel_from_callback(
    degree: usize,
    dim: usize,
    callback: UqKernelFn,
    user_data: *mut c_void,
    name: *const c_char,
    kernel_out: *mut *mut UqKernel,
) -> UqStatus {
    guard(|| {
        let slot = out(kernel_out, "kernel_out")?;
        let f = callback.ok_or(Failure::Null("callback"))?;
        let name = if name.is_null() { "callback" } else { c_str(name, "name")? };
        let cb = Callback { f, user_data };
        let kernel = FnKernel::new(name, degree, (dim > 0).then_some(dim), move |pts: &[&[f64]]| cb.call(pts))?;
        *slot = Box::into_raw(Box::new(UqKernel { inner: Box::new(kernel) }));
        Ok(())
    })
}

/// Releases a kernel handle. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn uq_kernel_free(kernel: *mut UqKernel) {
    if !kernel.is_null() {
        drop(Box::from_raw(kernel));
    }
}

#[no_mangle]
pub unsafe extern "C" fn uq_kernel_degree(kernel: *const UqKernel) -> usize {
    kernel.as_ref().map_or(0, |k| k.inner.degree())
}

/// The p-quantile of all kernel values over m-subsets of the sample.
#[no_mangle]
pub unsafe extern "C" fn uq_u_quantile(
    kernel: *const UqKernel,
    data: *const f64,
    n: usize,
    dim: usize,
    p: f64,
    backend: UqBackend,
    result: *mut UqEstimate,
) -> UqStatus {
    guard(|| {
        let kernel = non_null(kernel, "kernel")?;
        let result = out(result, "result")?;
        let sample = sample_from(data, n, dim)?;
        let est = u_quantile(
            &sample,
            kernel.inner.as_ref(),
            QuantileSpec::new(p)?,
            backend.into(),
            &EngineConfig::default(),
        )?;
        *result = UqEstimate {
            value: est.value,
            total_count: est.total_count,
            selected_rank: est.selected_rank,
            tie_count: est.tie_count,
        };
        Ok(())
    })
}

/// Number of kernel values `<= threshold`.
#[no_mangle]
pub unsafe extern "C" fn uq_count_leq(
    kernel: *const UqKernel,
    data: *const f64,
    n: usize,
    dim: usize,
    threshold: f64,
    count: *mut u64,
) -> UqStatus {
    guard(|| {
        let kernel = non_null(kernel, "kernel")?;
        let count = out(count, "count")?;
        let sample = sample_from(data, n, dim)?;
        *count = count_leq(&sample, kernel.inner.as_ref(), threshold)?;
        Ok(())
    })
}

fn config(seed: u64) -> AsymptoticConfig {
    AsymptoticConfig {
        seed,
        ..AsymptoticConfig::default()
    }
}

/// Plug-in estimate of the variance of the conditional indicator at the
/// p-quantile. May be nonpositive.
#[no_mangle]
pub unsafe extern "C" fn uq_zeta_plugin(
    kernel: *const UqKernel,
    data: *const f64,
    n: usize,
    dim: usize,
    p: f64,
    seed: u64,
    zeta: *mut f64,
) -> UqStatus {
    guard(|| {
        let kernel = non_null(kernel, "kernel")?;
        let zeta = out(zeta, "zeta")?;
        let sample = sample_from(data, n, dim)?;
        *zeta = zeta_plugin(&sample, kernel.inner.as_ref(), QuantileSpec::new(p)?, &config(seed))?.value;
        Ok(())
    })
}

/// Point estimate with plug-in standard error and confidence interval.
/// Returns [`UqStatus::Hypothesis`] when the plug-in constants are not
/// positive.
#[no_mangle]
pub unsafe extern "C" fn uq_asymptotic_summary(
    kernel: *const UqKernel,
    data: *const f64,
    n: usize,
    dim: usize,
    p: f64,
    level: f64,
    seed: u64,
    summary: *mut UqSummary,
) -> UqStatus {
    guard(|| {
        let kernel = non_null(kernel, "kernel")?;
        let summary = out(summary, "summary")?;
        let sample = sample_from(data, n, dim)?;
        let s = asymptotic_summary(&sample, kernel.inner.as_ref(), QuantileSpec::new(p)?, level, &config(seed))?;
        *summary = UqSummary {
            point: s.point,
            zeta_hat: s.zeta_hat,
            density_hat: s.density_hat,
            std_error: s.std_error,
            ci_lower: s.ci_lower,
            ci_upper: s.ci_upper,
            confidence_level: s.confidence_level,
            bandwidth: s.bandwidth,
            total_count: s.estimate.total_count,
            selected_rank: s.estimate.selected_rank,
            tie_count: s.estimate.tie_count,
            zeta_subsampled: s.zeta_subsampled,
            density_subsampled: s.density_subsampled,
        };
        Ok(())
    })
}

/// Asymptotic relative efficiency `f(mu)^2 zeta1 / zeta` of the
/// U-quantile-statistic against the U-statistic of the same kernel.
#[no_mangle]
pub unsafe extern "C" fn uq_efficiency(zeta1: f64, zeta: f64, density_at_mu: f64, ratio: *mut f64) -> UqStatus {
    guard(|| {
        let ratio = out(ratio, "ratio")?;
        *ratio = efficiency(&EfficiencyInput {
            zeta1,
            zeta,
            density_at_mu,
            mu: f64::NAN,
        })?;
        Ok(())
    })
}

/// Closed-form constants for the median of pairwise averages under a named
/// symmetric distribution such as `normal(0,1)` or `uniform(0,1)`.
#[no_mangle]
pub unsafe extern "C" fn uq_oracle_hl(distribution: *const c_char, oracle: *mut UqHlOracle) -> UqStatus {
    guard(|| {
        let oracle = out(oracle, "oracle")?;
        let dist: DistributionSpec = c_str(distribution, "distribution")?.parse()?;
        let o = oracle_hl(&dist)?;
        *oracle = UqHlOracle {
            center: o.center,
            zeta: o.zeta,
            square_integral: o.square_integral,
            density_at_center: o.density_at_center,
            sigma2: o.sigma2,
        };
        Ok(())
    })
}
