//! C ABI for the critlab library.
//!
//! Root sets and critical-point sets cross the boundary as opaque handles.
//! Every fallible call returns a [`CritlabStatus`]; on failure the message is
//! kept per thread and read back with [`critlab_last_error_message`].
//! Complex numbers travel as parallel `re`/`im` arrays of `double`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use critlab::critical::{critical_points, CriticalSet, SolverSettings};
use critlab::measures::{sample, DistributionSpec, Seed};
use critlab::poly_field::{log_abs_l, RootSample};
use critlab::transport::{wasserstein1_auto, EmpiricalMeasure};
use critlab::{Complex64, Error};

/// Result codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CritlabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidDistribution = 3,
    /// The solver hit its sweep cap; the output handle is still valid.
    NotConverged = 4,
    Numerical = 5,
    Io = 6,
    /// A Rust panic was caught at the boundary.
    Internal = 7,
}

/// An owned set of roots.
pub struct CritlabRoots {
    inner: RootSample,
}

/// An owned set of critical points with solver diagnostics.
pub struct CritlabCriticalSet {
    inner: CriticalSet,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_last_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &Error) -> CritlabStatus {
    match e {
        Error::InvalidDistribution(_) | Error::Json(_) => CritlabStatus::InvalidDistribution,
        Error::InvalidArgument(_) | Error::AtomicPoint(_) | Error::Config(_) | Error::UnknownDiagnostic { .. } => {
            CritlabStatus::InvalidArgument
        }
        Error::Io(_) | Error::Csv(_) => CritlabStatus::Io,
        _ => CritlabStatus::Numerical,
    }
}

/// Runs `f`, recording any error or panic as the thread's last error.
fn guard<F: FnOnce() -> Result<CritlabStatus, (CritlabStatus, String)>>(f: F) -> CritlabStatus {
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(status)) => status,
        Ok(Err((status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("internal error: {msg}"));
            CritlabStatus::Internal
        }
    }
}

type Fallible<T> = Result<T, (CritlabStatus, String)>;

fn lib<T>(r: critlab::Result<T>) -> Fallible<T> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (CritlabStatus, String) {
    (CritlabStatus::NullPointer, format!("{what} is null"))
}

unsafe fn points_from(re: *const f64, im: *const f64, len: usize) -> Fallible<Vec<Complex64>> {
    if len == 0 {
        return Ok(Vec::new());
    }
    if re.is_null() || im.is_null() {
        return Err(null("coordinate array"));
    }
    let (re, im) = (std::slice::from_raw_parts(re, len), std::slice::from_raw_parts(im, len));
    Ok(re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)).collect())
}

/// Copies up to `capacity` points out; returns the number copied.
unsafe fn points_to(points: &[Complex64], re: *mut f64, im: *mut f64, capacity: usize) -> Fallible<usize> {
    let count = points.len().min(capacity);
    if count == 0 {
        return Ok(0);
    }
    if re.is_null() || im.is_null() {
        return Err(null("output array"));
    }
    let (re, im) = (
        std::slice::from_raw_parts_mut(re, count),
        std::slice::from_raw_parts_mut(im, count),
    );
    for (k, z) in points[..count].iter().enumerate() {
        re[k] = z.re;
        im[k] = z.im;
    }
    Ok(count)
}

fn boxed<T>(value: T, out: *mut *mut T) -> Fallible<()> {
    if out.is_null() {
        return Err(null("output handle"));
    }
    unsafe { *out = Box::into_raw(Box::new(value)) };
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn critlab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. The pointer is
/// valid until the next critlab call on the same thread.
#[no_mangle]
pub extern "C" fn critlab_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Wraps `len` roots given as coordinate arrays.
///
/// # Safety
/// `re` and `im` must each point to `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn critlab_roots_new(
    re: *const f64,
    im: *const f64,
    len: usize,
    out: *mut *mut CritlabRoots,
) -> CritlabStatus {
    guard(|| {
        let points = points_from(re, im, len)?;
        let inner = lib(RootSample::new(points))?;
        boxed(CritlabRoots { inner }, out)?;
        Ok(CritlabStatus::Ok)
    })
}

/// Draws `n` i.i.d. roots from a distribution given as JSON, e.g.
/// `{"family": "gaussian", "params": {"center": [0, 0], "scale": 1}}`.
///
/// # Safety
/// `spec_json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn critlab_roots_sample(
    spec_json: *const c_char,
    n: usize,
    seed: u64,
    out: *mut *mut CritlabRoots,
) -> CritlabStatus {
    guard(|| {
        if spec_json.is_null() {
            return Err(null("spec_json"));
        }
        let text = CStr::from_ptr(spec_json).to_str().map_err(|e| {
            (
                CritlabStatus::InvalidDistribution,
                format!("spec_json is not UTF-8: {e}"),
            )
        })?;
        let spec: DistributionSpec = lib(serde_json::from_str(text).map_err(Error::from))?;
        let inner = lib(sample(&spec, n, Seed::new(seed)).and_then(RootSample::new))?;
        boxed(CritlabRoots { inner }, out)?;
        Ok(CritlabStatus::Ok)
    })
}

/// Number of roots; 0 for a NULL handle.
///
/// # Safety
/// `roots` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn critlab_roots_len(roots: *const CritlabRoots) -> usize {
    roots.as_ref().map_or(0, |r| r.inner.n())
}

/// Copies up to `capacity` roots into `re`/`im`; `*written` receives the count.
///
/// # Safety
/// `roots` must be a live handle; `re`/`im` must hold `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn critlab_roots_get(
    roots: *const CritlabRoots,
    re: *mut f64,
    im: *mut f64,
    capacity: usize,
    written: *mut usize,
) -> CritlabStatus {
    guard(|| {
        let r = roots.as_ref().ok_or_else(|| null("roots"))?;
        let count = points_to(r.inner.points(), re, im, capacity)?;
        if !written.is_null() {
            *written = count;
        }
        Ok(CritlabStatus::Ok)
    })
}

/// `log|L_n(z)|` with `L_n = P'/P`; `-inf` at critical points, `+inf` at roots.
///
/// # Safety
/// `roots` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn critlab_log_abs_l(
    roots: *const CritlabRoots,
    re: f64,
    im: f64,
    out: *mut f64,
) -> CritlabStatus {
    guard(|| {
        let r = roots.as_ref().ok_or_else(|| null("roots"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = log_abs_l(&r.inner, Complex64::new(re, im));
        Ok(CritlabStatus::Ok)
    })
}

/// Frees a root handle; NULL is ignored.
///
/// # Safety
/// `roots` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn critlab_roots_free(roots: *mut CritlabRoots) {
    if !roots.is_null() {
        drop(Box::from_raw(roots));
    }
}

/// Solves for the `n - 1` critical points. Returns
/// `CRITLAB_STATUS_NOT_CONVERGED` with a valid handle when the sweep cap
/// was hit.
///
/// # Safety
/// `roots` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn critlab_critical_points(
    roots: *const CritlabRoots,
    out: *mut *mut CritlabCriticalSet,
) -> CritlabStatus {
    guard(|| {
        let r = roots.as_ref().ok_or_else(|| null("roots"))?;
        let inner = lib(critical_points(&r.inner, &SolverSettings::default()))?;
        let converged = inner.converged;
        let max = inner.max_residual();
        boxed(CritlabCriticalSet { inner }, out)?;
        if converged {
            Ok(CritlabStatus::Ok)
        } else {
            set_last_error(format!("solver hit its sweep cap; max residual {max:e}"));
            Ok(CritlabStatus::NotConverged)
        }
    })
}

/// Number of critical points; 0 for a NULL handle.
///
/// # Safety
/// `crits` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn critlab_critical_set_len(crits: *const CritlabCriticalSet) -> usize {
    crits.as_ref().map_or(0, |c| c.inner.len())
}

/// Whether the solve converged.
///
/// # Safety
/// `crits` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn critlab_critical_set_converged(crits: *const CritlabCriticalSet) -> bool {
    crits.as_ref().is_some_and(|c| c.inner.converged)
}

/// Largest per-point residual.
///
/// # Safety
/// `crits` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn critlab_critical_set_max_residual(crits: *const CritlabCriticalSet) -> f64 {
    crits.as_ref().map_or(f64::NAN, |c| c.inner.max_residual())
}

/// Copies up to `capacity` critical points into `re`/`im`.
///
/// # Safety
/// `crits` must be a live handle; `re`/`im` must hold `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn critlab_critical_set_get(
    crits: *const CritlabCriticalSet,
    re: *mut f64,
    im: *mut f64,
    capacity: usize,
    written: *mut usize,
) -> CritlabStatus {
    guard(|| {
        let c = crits.as_ref().ok_or_else(|| null("crits"))?;
        let count = points_to(&c.inner.points, re, im, capacity)?;
        if !written.is_null() {
            *written = count;
        }
        Ok(CritlabStatus::Ok)
    })
}

/// Frees a critical-set handle; NULL is ignored.
///
/// # Safety
/// `crits` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn critlab_critical_set_free(crits: *mut CritlabCriticalSet) {
    if !crits.is_null() {
        drop(Box::from_raw(crits));
    }
}

/// W1 distance between two uniform point clouds. Exact when
/// `len_a * len_b` is small enough, sliced otherwise (seeded by `seed`);
/// `*exact` reports which.
///
/// # Safety
/// Coordinate arrays must hold their stated lengths; `out` must be
/// writable; `exact` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn critlab_wasserstein1(
    a_re: *const f64,
    a_im: *const f64,
    len_a: usize,
    b_re: *const f64,
    b_im: *const f64,
    len_b: usize,
    seed: u64,
    out: *mut f64,
    exact: *mut bool,
) -> CritlabStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let a = lib(EmpiricalMeasure::from_points(&points_from(a_re, a_im, len_a)?))?;
        let b = lib(EmpiricalMeasure::from_points(&points_from(b_re, b_im, len_b)?))?;
        let (value, was_exact) = lib(wasserstein1_auto(&a, &b, seed))?;
        *out = value;
        if !exact.is_null() {
            *exact = was_exact;
        }
        Ok(CritlabStatus::Ok)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn message() -> String {
        let p = critlab_last_error_message();
        assert!(!p.is_null());
        unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
    }

    #[test]
    fn version_is_the_crate_version() {
        let v = unsafe { CStr::from_ptr(critlab_version()) };
        assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }

    #[test]
    fn errors_are_recorded_and_cleared() {
        let mut h = ptr::null_mut();
        let st = unsafe { critlab_roots_new(ptr::null(), ptr::null(), 3, &mut h) };
        assert_eq!(st, CritlabStatus::NullPointer);
        assert!(message().contains("null"));
        assert!(h.is_null());

        let (re, im) = ([0.0, 1.0], [0.0, 0.0]);
        let st = unsafe { critlab_roots_new(re.as_ptr(), im.as_ptr(), 2, &mut h) };
        assert_eq!(st, CritlabStatus::Ok);
        assert!(critlab_last_error_message().is_null());
        unsafe { critlab_roots_free(h) };
    }

    #[test]
    fn empty_roots_are_rejected() {
        let mut h = ptr::null_mut();
        let st = unsafe { critlab_roots_new(ptr::null(), ptr::null(), 0, &mut h) };
        assert_eq!(st, CritlabStatus::InvalidArgument);
        assert!(h.is_null());
    }

    #[test]
    fn free_accepts_null() {
        unsafe {
            critlab_roots_free(ptr::null_mut());
            critlab_critical_set_free(ptr::null_mut());
        }
    }
}
