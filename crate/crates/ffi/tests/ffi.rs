use std::ffi::{c_void, CStr, CString};
use std::ptr;

use uquantile_ffi::*;

fn kernel(name: &str) -> *mut UqKernel {
    let name = CString::new(name).unwrap();
    let mut k = ptr::null_mut();
    assert_eq!(unsafe { uq_kernel_from_name(name.as_ptr(), &mut k) }, UqStatus::Ok);
    assert!(!k.is_null());
    k
}

fn last_error() -> String {
    let p = uq_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn walsh_median_of_three_points() {
    let k = kernel("walsh");
    let data = [1.0, 2.0, 3.0];
    let mut est = UqEstimate::default();
    for backend in [UqBackend::Exact, UqBackend::Fast, UqBackend::Auto] {
        let st = unsafe { uq_u_quantile(k, data.as_ptr(), 3, 1, 0.5, backend, &mut est) };
        assert_eq!(st, UqStatus::Ok);
        assert_eq!((est.value, est.total_count, est.selected_rank, est.tie_count), (2.0, 3, 2, 1));
    }
    let mut count = 0;
    assert_eq!(unsafe { uq_count_leq(k, data.as_ptr(), 3, 1, 2.0, &mut count) }, UqStatus::Ok);
    assert_eq!(count, 2);
    assert_eq!(unsafe { uq_kernel_degree(k) }, 2);
    unsafe { uq_kernel_free(k) };
}

#[test]
fn error_codes_and_messages() {
    let mut k = ptr::null_mut();
    let bad = CString::new("median").unwrap();
    assert_eq!(unsafe { uq_kernel_from_name(bad.as_ptr(), &mut k) }, UqStatus::UnknownKernel);
    assert!(last_error().contains("median"));
    assert!(k.is_null());

    let walsh = kernel("walsh");
    let data = [1.0, 2.0];
    let mut est = UqEstimate::default();
    assert_eq!(
        unsafe { uq_u_quantile(walsh, data.as_ptr(), 2, 1, 1.5, UqBackend::Auto, &mut est) },
        UqStatus::InvalidArgument
    );
    assert_eq!(
        unsafe { uq_u_quantile(walsh, data.as_ptr(), 1, 1, 0.5, UqBackend::Auto, &mut est) },
        UqStatus::TooFewPoints
    );
    assert_eq!(
        unsafe { uq_u_quantile(walsh, ptr::null(), 2, 1, 0.5, UqBackend::Auto, &mut est) },
        UqStatus::NullPointer
    );
    assert_eq!(
        unsafe { uq_u_quantile(ptr::null(), data.as_ptr(), 2, 1, 0.5, UqBackend::Auto, &mut est) },
        UqStatus::NullPointer
    );
    let planar = [0.0, 1.0, 2.0, 3.0];
    assert_eq!(
        unsafe { uq_u_quantile(walsh, planar.as_ptr(), 2, 2, 0.5, UqBackend::Auto, &mut est) },
        UqStatus::DimensionMismatch
    );
    let nan = [f64::NAN, 1.0];
    assert_eq!(
        unsafe { uq_u_quantile(walsh, nan.as_ptr(), 2, 1, 0.5, UqBackend::Auto, &mut est) },
        UqStatus::InvalidArgument
    );
    let mean3 = kernel("mean:3");
    let xs = [1.0, 2.0, 3.0, 4.0];
    assert_eq!(
        unsafe { uq_u_quantile(mean3, xs.as_ptr(), 4, 1, 0.5, UqBackend::Fast, &mut est) },
        UqStatus::NoFastPath
    );
    unsafe {
        uq_kernel_free(walsh);
        uq_kernel_free(mean3);
        uq_kernel_free(ptr::null_mut());
    }
}

unsafe extern "C" fn pair_max(points: *const *const f64, m: usize, dim: usize, _user: *mut c_void) -> f64 {
    let pts = std::slice::from_raw_parts(points, m);
    let mut best = f64::NEG_INFINITY;
    for &p in pts {
        for c in std::slice::from_raw_parts(p, dim) {
            best = best.max(*c);
        }
    }
    best
}

unsafe extern "C" fn scaled_sum(points: *const *const f64, m: usize, _dim: usize, user: *mut c_void) -> f64 {
    let scale = *(user as *const f64);
    let pts = std::slice::from_raw_parts(points, m);
    pts.iter().map(|&p| *p).sum::<f64>() * scale
}

#[test]
fn callback_kernels() {
    let mut k = ptr::null_mut();
    let name = CString::new("pairmax").unwrap();
    let st = unsafe { uq_kernel_from_callback(2, 0, Some(pair_max), ptr::null_mut(), name.as_ptr(), &mut k) };
    assert_eq!(st, UqStatus::Ok);
    // pair maxima of {1, 5, 2, 4}: 5, 2, 4, 5, 5, 4
    let data = [1.0, 5.0, 2.0, 4.0];
    let mut est = UqEstimate::default();
    assert_eq!(unsafe { uq_u_quantile(k, data.as_ptr(), 4, 1, 0.5, UqBackend::Auto, &mut est) }, UqStatus::Ok);
    assert_eq!((est.value, est.total_count, est.tie_count), (4.0, 6, 2));
    assert_eq!(
        unsafe { uq_u_quantile(k, data.as_ptr(), 4, 1, 0.5, UqBackend::Fast, &mut est) },
        UqStatus::NoFastPath
    );
    unsafe { uq_kernel_free(k) };

    // callback matching the built-in pairwise average, with user data
    let half = 0.5f64;
    let mut cb = ptr::null_mut();
    let st = unsafe {
        uq_kernel_from_callback(2, 1, Some(scaled_sum), &half as *const f64 as *mut c_void, ptr::null(), &mut cb)
    };
    assert_eq!(st, UqStatus::Ok);
    let walsh = kernel("walsh");
    let xs: Vec<f64> = (0..40).map(|i| ((i * 37) % 23) as f64 * 0.3 - 2.0).collect();
    let (mut a, mut b) = (0.0, 0.0);
    unsafe {
        assert_eq!(uq_zeta_plugin(cb, xs.as_ptr(), 40, 1, 0.5, 1, &mut a), UqStatus::Ok);
        assert_eq!(uq_zeta_plugin(walsh, xs.as_ptr(), 40, 1, 0.5, 1, &mut b), UqStatus::Ok);
    }
    assert_eq!(a, b);
    let pts = [0.0, 1.0, 2.0, 3.0];
    let mut est = UqEstimate::default();
    assert_eq!(
        unsafe { uq_u_quantile(cb, pts.as_ptr(), 2, 2, 0.5, UqBackend::Auto, &mut est) },
        UqStatus::DimensionMismatch
    );
    assert_eq!(
        unsafe { uq_kernel_from_callback(0, 1, Some(scaled_sum), ptr::null_mut(), ptr::null(), &mut cb) },
        UqStatus::InvalidArgument
    );
    assert_eq!(
        unsafe { uq_kernel_from_callback(2, 1, None, ptr::null_mut(), ptr::null(), &mut cb) },
        UqStatus::NullPointer
    );
    unsafe {
        uq_kernel_free(walsh);
    }
}

#[test]
fn summary_and_hypothesis_status() {
    let walsh = kernel("walsh");
    let xs: Vec<f64> = (1..=60).map(|i| (i as f64 * 0.618).fract() * 4.0 - 2.0).collect();
    let mut s = UqSummary::default();
    let st = unsafe { uq_asymptotic_summary(walsh, xs.as_ptr(), xs.len(), 1, 0.5, 0.95, 7, &mut s) };
    assert_eq!(st, UqStatus::Ok);
    assert!(s.ci_lower < s.point && s.point < s.ci_upper);
    assert!(s.zeta_hat > 0.0 && s.density_hat > 0.0);
    assert_eq!(s.total_count, 1770);
    let expected = 2.0 * s.zeta_hat.sqrt() / (s.density_hat * 60f64.sqrt());
    assert!((s.std_error - expected).abs() < 1e-15);

    let flat = [3.0; 8];
    let st = unsafe { uq_asymptotic_summary(walsh, flat.as_ptr(), 8, 1, 0.5, 0.95, 7, &mut s) };
    assert_eq!(st, UqStatus::Hypothesis);
    assert!(last_error().contains("ζ > 0"));
    unsafe { uq_kernel_free(walsh) };
}

#[test]
fn efficiency_and_oracle() {
    let mut o = UqHlOracle::default();
    let normal = CString::new("normal(0,1)").unwrap();
    assert_eq!(unsafe { uq_oracle_hl(normal.as_ptr(), &mut o) }, UqStatus::Ok);
    assert!((o.zeta - 1.0 / 12.0).abs() < 1e-15);
    assert!((o.sigma2 - std::f64::consts::PI / 3.0).abs() < 1e-12);

    let exp = CString::new("exponential(1)").unwrap();
    assert_eq!(unsafe { uq_oracle_hl(exp.as_ptr(), &mut o) }, UqStatus::NoOracle);
    let junk = CString::new("gamma(2)").unwrap();
    assert_ne!(unsafe { uq_oracle_hl(junk.as_ptr(), &mut o) }, UqStatus::Ok);

    // walsh kernel under N(0,1): zeta1 = 1/4, zeta = 1/12, f(0) = 1/sqrt(pi)
    let mut r = 0.0;
    let f = 1.0 / std::f64::consts::PI.sqrt();
    assert_eq!(unsafe { uq_efficiency(0.25, 1.0 / 12.0, f, &mut r) }, UqStatus::Ok);
    assert!((r - 3.0 / std::f64::consts::PI).abs() < 1e-12);
    assert_eq!(unsafe { uq_efficiency(0.125, 0.0, f, &mut r) }, UqStatus::InvalidArgument);
    assert_eq!(unsafe { uq_efficiency(0.125, 0.1, f, ptr::null_mut()) }, UqStatus::NullPointer);
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/uquantile.h")).unwrap();
    for name in [
        "uq_last_error_message",
        "uq_kernel_from_name",
        "uq_kernel_from_callback",
        "uq_kernel_free",
        "uq_kernel_degree",
        "uq_u_quantile",
        "uq_count_leq",
        "uq_zeta_plugin",
        "uq_asymptotic_summary",
        "uq_efficiency",
        "uq_oracle_hl",
        "typedef struct UqKernel UqKernel",
        "UQ_STATUS_HYPOTHESIS = 8",
    ] {
        assert!(header.contains(name), "missing {name}");
    }
}
