//! C ABI over the cubature library: opaque handles, status codes, and a
//! last-error message per thread.
//!
//! Ownership: every `*_create`/`*_load` hands back a heap handle that must be
//! released with the matching `*_free`. Out-parameters are written only on
//! `FROLOV_STATUS_OK`. Strings are NUL-terminated UTF-8. The pointer from
//! `frolov_last_error` stays valid until the next failing call on the same
//! thread.

use frolov::corpus;
use frolov::lattice::SupportBox;
use frolov::matrix::{Construction, FrolovMatrix};
use frolov::rule::{self, QuadratureSpec, RandomizedMode};
use frolov::transform::PsiTable;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;
use std::str::FromStr;

/// Result codes of every fallible entry point.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum FrolovStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    UnknownFunction = 4,
    DomainError = 5,
    IoError = 6,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let message = CString::new(message).unwrap_or_else(|_| CString::new("invalid error").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(message));
}

fn status_of(error: &frolov::Error) -> FrolovStatus {
    use frolov::Error as E;
    match error {
        E::UnknownFunction(_) => FrolovStatus::UnknownFunction,
        E::Io(_) | E::Json(_) | E::BadCache(_) => FrolovStatus::IoError,
        E::DimensionRange { .. }
        | E::DimensionMismatch { .. }
        | E::NotPowerOfTwo(_)
        | E::NonPositiveScale
        | E::EmptyBox => FrolovStatus::InvalidArgument,
        _ => FrolovStatus::DomainError,
    }
}

fn fail(error: frolov::Error) -> FrolovStatus {
    let status = status_of(&error);
    set_error(error.to_string());
    status
}

/// Latest error message on this thread, or NULL when no call has failed yet.
#[no_mangle]
pub extern "C" fn frolov_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(std::ptr::null(), |msg| msg.as_ptr())
    })
}

unsafe fn utf8_arg<'a>(ptr: *const c_char) -> Result<&'a str, FrolovStatus> {
    if ptr.is_null() {
        set_error("null string argument".into());
        return Err(FrolovStatus::NullPointer);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("string argument is not valid UTF-8".into());
        FrolovStatus::InvalidUtf8
    })
}

/// Opaque generator-matrix handle.
pub struct FrolovMatrixHandle {
    matrix: FrolovMatrix,
    psi: PsiTable,
}

/// Validation summary of a generator matrix.
#[repr(C)]
#[derive(Clone, Copy)]
pub struct FrolovValidation {
    pub search_radius: i64,
    pub min_product: f64,
    pub box_trials: u32,
    pub max_excess: f64,
    pub valid: bool,
}

/// One quadrature estimate.
#[repr(C)]
#[derive(Clone, Copy)]
pub struct FrolovEstimate {
    pub value: f64,
    pub node_count: u64,
}

/// Rule randomization selector.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum FrolovMode {
    Deterministic = 0,
    Dilated = 1,
    DilatedShifted = 2,
}

/// Build a generator matrix from a named construction ("frolov-poly" or
/// "chebyshev") in the given dimension.
///
/// # Safety
/// `construction` must be a valid NUL-terminated string and `out` a valid
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn frolov_matrix_create(
    construction: *const c_char,
    dim: usize,
    out: *mut *mut FrolovMatrixHandle,
) -> FrolovStatus {
    if out.is_null() {
        set_error("null out pointer".into());
        return FrolovStatus::NullPointer;
    }
    let name = match utf8_arg(construction) {
        Ok(s) => s,
        Err(status) => return status,
    };
    let parsed = match Construction::from_str(name) {
        Ok(c) => c,
        Err(_) => {
            set_error(format!(
                "unknown construction '{name}' (expected frolov-poly or chebyshev)"
            ));
            return FrolovStatus::InvalidArgument;
        }
    };
    match FrolovMatrix::from_construction(parsed, dim) {
        Ok(matrix) => {
            *out = Box::into_raw(Box::new(FrolovMatrixHandle {
                matrix,
                psi: PsiTable::new(),
            }));
            FrolovStatus::Ok
        }
        Err(error) => fail(error),
    }
}

/// Load a matrix from the JSON cache format.
///
/// # Safety
/// `path` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn frolov_matrix_load(
    path: *const c_char,
    out: *mut *mut FrolovMatrixHandle,
) -> FrolovStatus {
    if out.is_null() {
        set_error("null out pointer".into());
        return FrolovStatus::NullPointer;
    }
    let path = match utf8_arg(path) {
        Ok(s) => PathBuf::from(s),
        Err(status) => return status,
    };
    match FrolovMatrix::load_cache(&path) {
        Ok(matrix) => {
            *out = Box::into_raw(Box::new(FrolovMatrixHandle {
                matrix,
                psi: PsiTable::new(),
            }));
            FrolovStatus::Ok
        }
        Err(error) => fail(error),
    }
}

/// Write a validated matrix to the JSON cache format.
///
/// # Safety
/// `handle` must come from this library and `path` be a valid string.
#[no_mangle]
pub unsafe extern "C" fn frolov_matrix_save(
    handle: *const FrolovMatrixHandle,
    path: *const c_char,
) -> FrolovStatus {
    let Some(handle) = handle.as_ref() else {
        set_error("null matrix handle".into());
        return FrolovStatus::NullPointer;
    };
    let path = match utf8_arg(path) {
        Ok(s) => PathBuf::from(s),
        Err(status) => return status,
    };
    match handle.matrix.save_cache(&path) {
        Ok(()) => FrolovStatus::Ok,
        Err(error) => fail(error),
    }
}

/// Release a matrix handle.
///
/// # Safety
/// `handle` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn frolov_matrix_free(handle: *mut FrolovMatrixHandle) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Dimension of the generator matrix, 0 on a null handle.
///
/// # Safety
/// `handle` must come from this library.
#[no_mangle]
pub unsafe extern "C" fn frolov_matrix_dim(handle: *const FrolovMatrixHandle) -> usize {
    handle.as_ref().map_or(0, |h| h.matrix.dim())
}

/// |det B|, NaN on a null handle.
///
/// # Safety
/// `handle` must come from this library.
#[no_mangle]
pub unsafe extern "C" fn frolov_matrix_det_abs(handle: *const FrolovMatrixHandle) -> f64 {
    handle.as_ref().map_or(f64::NAN, |h| h.matrix.det_abs())
}

/// Maximum absolute column sum of B, NaN on a null handle.
///
/// # Safety
/// `handle` must come from this library.
#[no_mangle]
pub unsafe extern "C" fn frolov_matrix_col_norm1(handle: *const FrolovMatrixHandle) -> f64 {
    handle.as_ref().map_or(f64::NAN, |h| h.matrix.col_norm1())
}

/// Run the finite validation sweep (product condition to `radius`, point
/// counts on `box_trials` random boxes) and report the outcome.
///
/// # Safety
/// `handle` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn frolov_matrix_validate(
    handle: *mut FrolovMatrixHandle,
    radius: i64,
    box_trials: u32,
    seed: u64,
    out: *mut FrolovValidation,
) -> FrolovStatus {
    let Some(handle) = handle.as_mut() else {
        set_error("null matrix handle".into());
        return FrolovStatus::NullPointer;
    };
    if out.is_null() {
        set_error("null out pointer".into());
        return FrolovStatus::NullPointer;
    }
    if radius < 1 {
        set_error("validation radius must be at least 1".into());
        return FrolovStatus::InvalidArgument;
    }
    use rand_chacha::rand_core::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let report = handle.matrix.validate(radius, box_trials, &mut rng);
    *out = FrolovValidation {
        search_radius: report.search_radius,
        min_product: report.min_product,
        box_trials: report.box_trials,
        max_excess: report.max_excess,
        valid: report.is_valid(),
    };
    FrolovStatus::Ok
}

fn run_estimate(
    handle: &FrolovMatrixHandle,
    f: &corpus::TestFunction,
    n: f64,
    mode: FrolovMode,
    transformed: bool,
    seed: u64,
) -> frolov::Result<FrolovEstimate> {
    let d = handle.matrix.dim();
    let estimate = match mode {
        FrolovMode::Deterministic => {
            let spec = QuadratureSpec {
                n,
                dilation: vec![1.0; d],
                shift: vec![0.0; d],
                transformed,
            };
            rule::estimate(&handle.matrix, &spec, &handle.psi, f)?
        }
        FrolovMode::Dilated => {
            let mut rng = rule::trial_rng(seed, 0);
            rule::randomized_estimate(
                &handle.matrix,
                n,
                f,
                &mut rng,
                &RandomizedMode::DilationOnly {
                    shift: vec![0.0; d],
                },
                transformed,
                &handle.psi,
            )?
        }
        FrolovMode::DilatedShifted => {
            let mut rng = rule::trial_rng(seed, 0);
            rule::randomized_estimate(
                &handle.matrix,
                n,
                f,
                &mut rng,
                &RandomizedMode::DilationShift,
                transformed,
                &handle.psi,
            )?
        }
    };
    Ok(FrolovEstimate {
        value: estimate.value,
        node_count: estimate.node_count,
    })
}

/// Integrate a named benchmark function ("tent", "poly-bump:r=K",
/// "smooth-bump", "boundary-poly").
///
/// # Safety
/// `handle`, `function`, and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn frolov_integrate(
    handle: *const FrolovMatrixHandle,
    function: *const c_char,
    n: f64,
    mode: FrolovMode,
    transformed: bool,
    seed: u64,
    out: *mut FrolovEstimate,
) -> FrolovStatus {
    let Some(handle) = handle.as_ref() else {
        set_error("null matrix handle".into());
        return FrolovStatus::NullPointer;
    };
    if out.is_null() {
        set_error("null out pointer".into());
        return FrolovStatus::NullPointer;
    }
    let name = match utf8_arg(function) {
        Ok(s) => s,
        Err(status) => return status,
    };
    let f = match corpus::by_name(name, handle.matrix.dim()) {
        Ok(f) => f,
        Err(error) => return fail(error),
    };
    match run_estimate(handle, &f, n, mode, transformed, seed) {
        Ok(estimate) => {
            *out = estimate;
            FrolovStatus::Ok
        }
        Err(error) => fail(error),
    }
}

/// User integrand: x has `dim` coordinates; `ctx` is passed through verbatim.
pub type FrolovIntegrand =
    Option<unsafe extern "C" fn(x: *const f64, dim: usize, ctx: *mut std::ffi::c_void) -> f64>;

struct CallbackFn {
    callback: unsafe extern "C" fn(*const f64, usize, *mut std::ffi::c_void) -> f64,
    ctx: *mut std::ffi::c_void,
}

// The evaluator is only invoked on the caller's thread for the duration of
// one integrate call; the callback contract makes the caller responsible for
// any shared state behind ctx.
unsafe impl Send for CallbackFn {}
unsafe impl Sync for CallbackFn {}

impl CallbackFn {
    fn call(&self, x: &[f64]) -> f64 {
        unsafe { (self.callback)(x.as_ptr(), x.len(), self.ctx) }
    }
}

/// Integrate a caller-supplied function over the box [support_lo, support_hi]
/// (each of length `dim`). With `transformed` set, the integrand is read on
/// the unit cube through the smooth warp; `exact_integral_hint` is only used
/// to report nothing and may be 0.
///
/// # Safety
/// All pointers must be valid; the callback must tolerate any x inside the
/// support box.
#[no_mangle]
pub unsafe extern "C" fn frolov_integrate_callback(
    handle: *const FrolovMatrixHandle,
    integrand: FrolovIntegrand,
    ctx: *mut std::ffi::c_void,
    support_lo: *const f64,
    support_hi: *const f64,
    boundary_nonvanishing: bool,
    n: f64,
    mode: FrolovMode,
    transformed: bool,
    seed: u64,
    out: *mut FrolovEstimate,
) -> FrolovStatus {
    let Some(handle) = handle.as_ref() else {
        set_error("null matrix handle".into());
        return FrolovStatus::NullPointer;
    };
    let Some(callback) = integrand else {
        set_error("null integrand".into());
        return FrolovStatus::NullPointer;
    };
    if out.is_null() || support_lo.is_null() || support_hi.is_null() {
        set_error("null out or support pointer".into());
        return FrolovStatus::NullPointer;
    }
    let d = handle.matrix.dim();
    let lo = std::slice::from_raw_parts(support_lo, d).to_vec();
    let hi = std::slice::from_raw_parts(support_hi, d).to_vec();
    let support = match SupportBox::new(lo, hi) {
        Ok(b) => b,
        Err(error) => return fail(error),
    };
    let wrapped = CallbackFn { callback, ctx };
    let f = corpus::TestFunction::custom(
        "callback",
        d,
        support,
        0.0,
        corpus::SmoothnessTags {
            boundary_nonvanishing,
            ..Default::default()
        },
        move |x: &[f64]| wrapped.call(x),
    );
    match run_estimate(handle, &f, n, mode, transformed, seed) {
        Ok(estimate) => {
            *out = estimate;
            FrolovStatus::Ok
        }
        Err(error) => fail(error),
    }
}

/// The smooth warp psi(x): 0 below 0, 1 above 1, a C-infinity diffeomorphism
/// of (0,1) in between. Every call shares one precomputed table.
#[no_mangle]
pub extern "C" fn frolov_warp(x: f64) -> f64 {
    thread_local! {
        static TABLE: PsiTable = PsiTable::new();
    }
    TABLE.with(|t| t.psi(x))
}

/// Derivative of the warp, psi'(x) = h(x) / c_h.
#[no_mangle]
pub extern "C" fn frolov_warp_derivative(x: f64) -> f64 {
    thread_local! {
        static TABLE: PsiTable = PsiTable::new();
    }
    TABLE.with(|t| t.psi_prime(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CString;
    use std::ptr;

    unsafe fn create(construction: &str, dim: usize) -> *mut FrolovMatrixHandle {
        let name = CString::new(construction).unwrap();
        let mut handle: *mut FrolovMatrixHandle = ptr::null_mut();
        let status = frolov_matrix_create(name.as_ptr(), dim, &mut handle);
        assert_eq!(status, FrolovStatus::Ok);
        handle
    }

    #[test]
    fn create_query_free() {
        unsafe {
            let handle = create("frolov-poly", 2);
            assert_eq!(frolov_matrix_dim(handle), 2);
            let det = frolov_matrix_det_abs(handle);
            assert!((det - 2.0 * std::f64::consts::SQRT_2).abs() < 1e-12);
            assert!((frolov_matrix_col_norm1(handle) - 4.0).abs() < 1e-12);
            frolov_matrix_free(handle);
        }
    }

    #[test]
    fn validate_and_cache_round_trip() {
        unsafe {
            let handle = create("chebyshev", 2);
            let mut validation = FrolovValidation {
                search_radius: 0,
                min_product: 0.0,
                box_trials: 0,
                max_excess: 0.0,
                valid: false,
            };
            let status = frolov_matrix_validate(handle, 30, 16, 7, &mut validation);
            assert_eq!(status, FrolovStatus::Ok);
            assert!(validation.valid);
            assert!(validation.min_product >= 1.0 - 1e-9);

            let path = std::env::temp_dir().join(format!("frolov-capi-{}.json", std::process::id()));
            let cpath = CString::new(path.to_str().unwrap()).unwrap();
            assert_eq!(frolov_matrix_save(handle, cpath.as_ptr()), FrolovStatus::Ok);
            let mut loaded: *mut FrolovMatrixHandle = ptr::null_mut();
            assert_eq!(frolov_matrix_load(cpath.as_ptr(), &mut loaded), FrolovStatus::Ok);
            assert_eq!(frolov_matrix_dim(loaded), 2);
            assert_eq!(
                frolov_matrix_det_abs(loaded).to_bits(),
                frolov_matrix_det_abs(handle).to_bits()
            );
            frolov_matrix_free(loaded);
            frolov_matrix_free(handle);
            std::fs::remove_file(&path).ok();
        }
    }

    #[test]
    fn integrate_matches_library() {
        unsafe {
            let handle = create("frolov-poly", 2);
            let name = CString::new("tent").unwrap();
            let mut estimate = FrolovEstimate {
                value: 0.0,
                node_count: 0,
            };
            let status = frolov_integrate(
                handle,
                name.as_ptr(),
                256.0,
                FrolovMode::DilatedShifted,
                false,
                42,
                &mut estimate,
            );
            assert_eq!(status, FrolovStatus::Ok);

            // the exact same draw through the library API
            let matrix = FrolovMatrix::from_construction(Construction::FrolovPoly, 2).unwrap();
            let f = corpus::tent(2);
            let psi = PsiTable::new();
            let mut rng = rule::trial_rng(42, 0);
            let direct = rule::randomized_estimate(
                &matrix,
                256.0,
                &f,
                &mut rng,
                &RandomizedMode::DilationShift,
                false,
                &psi,
            )
            .unwrap();
            assert_eq!(estimate.value.to_bits(), direct.value.to_bits());
            assert_eq!(estimate.node_count, direct.node_count);
            frolov_matrix_free(handle);
        }
    }

    unsafe extern "C" fn product_integrand(
        x: *const f64,
        dim: usize,
        _ctx: *mut std::ffi::c_void,
    ) -> f64 {
        let x = std::slice::from_raw_parts(x, dim);
        x.iter().map(|v| 1.0 + v).product()
    }

    #[test]
    fn callback_integrand_transformed() {
        unsafe {
            let handle = create("frolov-poly", 2);
            let lo = [0.0, 0.0];
            let hi = [1.0, 1.0];
            let mut estimate = FrolovEstimate {
                value: 0.0,
                node_count: 0,
            };
            let status = frolov_integrate_callback(
                handle,
                Some(product_integrand),
                ptr::null_mut(),
                lo.as_ptr(),
                hi.as_ptr(),
                true,
                2048.0,
                FrolovMode::Deterministic,
                true,
                0,
                &mut estimate,
            );
            assert_eq!(status, FrolovStatus::Ok);
            assert!(
                (estimate.value - 2.25).abs() < 1e-4,
                "value {}",
                estimate.value
            );
            frolov_matrix_free(handle);
        }
    }

    #[test]
    fn error_paths_and_last_error() {
        unsafe {
            let mut handle: *mut FrolovMatrixHandle = ptr::null_mut();
            let bad = CString::new("nonsense").unwrap();
            let status = frolov_matrix_create(bad.as_ptr(), 2, &mut handle);
            assert_eq!(status, FrolovStatus::InvalidArgument);
            let message = CStr::from_ptr(frolov_last_error()).to_str().unwrap();
            assert!(message.contains("nonsense"));

            let cheb3 = CString::new("chebyshev").unwrap();
            let status = frolov_matrix_create(cheb3.as_ptr(), 3, &mut handle);
            assert_eq!(status, FrolovStatus::InvalidArgument); // 3 is not a power of two

            let good = create("frolov-poly", 2);
            let boundary = CString::new("boundary-poly").unwrap();
            let mut estimate = FrolovEstimate {
                value: 0.0,
                node_count: 0,
            };
            // boundary-nonvanishing without the transform is rejected
            let status = frolov_integrate(
                good,
                boundary.as_ptr(),
                64.0,
                FrolovMode::Deterministic,
                false,
                0,
                &mut estimate,
            );
            assert_eq!(status, FrolovStatus::DomainError);
            frolov_matrix_free(good);
        }
    }

    #[test]
    fn warp_endpoints() {
        assert_eq!(frolov_warp(0.0), 0.0);
        assert_eq!(frolov_warp(1.0), 1.0);
        assert_eq!(frolov_warp(0.5), 0.5);
        assert_eq!(frolov_warp_derivative(0.0), 0.0);
        assert!(frolov_warp_derivative(0.5) > 1.0);
    }
}
