//! C ABI over the surgery laboratory: opaque handles, integer status
//! codes, and a thread-local error message.
//!
//! Every function returns 0 on success or a positive error code matching
//! the core crate's taxonomy; `qcs_last_error` retrieves the message for
//! the most recent failure on the calling thread.

use num_complex::Complex64;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use qcsurgery::harness::{run_instability_experiment, ExperimentConfig, ExperimentOutcome};
use qcsurgery::poly::Polynomial;
use qcsurgery::rational::RationalMap;
use qcsurgery::surgery::{build_blend, RadialBlendMap};

/// Status code for a successful call.
pub const QCS_OK: i32 = 0;
/// A null pointer was passed where a value was required.
pub const QCS_NULL_ARGUMENT: i32 = 1;
/// The callee panicked; treat the handle as poisoned.
pub const QCS_PANIC: i32 = 2;
/// Invalid argument outside the core error taxonomy.
pub const QCS_BAD_ARGUMENT: i32 = 3;

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(message: &str) {
    let sanitized: String = message.chars().filter(|&c| c != '\0').collect();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn report(err: qcsurgery::Error) -> i32 {
    let code = err.code();
    set_error(&err.to_string());
    code
}

fn guard<F: FnOnce() -> i32>(body: F) -> i32 {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(code) => code,
        Err(_) => {
            set_error("internal panic");
            QCS_PANIC
        }
    }
}

/// Copies the last error message for this thread into `buf` (NUL
/// terminated, truncated to `cap` bytes) and returns the full length.
///
/// # Safety
/// `buf` must point to at least `cap` writable bytes, or be null (then
/// only the length is returned).
#[no_mangle]
pub unsafe extern "C" fn qcs_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let msg = slot.borrow();
        let bytes = msg.as_bytes_with_nul();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap);
            std::ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            // always terminate
            *buf.add(n - 1) = 0;
        }
        bytes.len() - 1
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qcs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Opaque rational map handle.
pub struct QcsMap {
    inner: RationalMap,
}

/// Builds a polynomial map from complex coefficients in ascending degree
/// order. On success writes a heap handle to `out`.
///
/// # Safety
/// `coeff_re` and `coeff_im` must point to `len` readable doubles each;
/// `out` must be a valid destination pointer.
#[no_mangle]
pub unsafe extern "C" fn qcs_map_new_poly(
    coeff_re: *const f64,
    coeff_im: *const f64,
    len: usize,
    out: *mut *mut QcsMap,
) -> i32 {
    if coeff_re.is_null() || coeff_im.is_null() || out.is_null() || len == 0 {
        set_error("null coefficient or output pointer");
        return QCS_NULL_ARGUMENT;
    }
    let re = std::slice::from_raw_parts(coeff_re, len);
    let im = std::slice::from_raw_parts(coeff_im, len);
    guard(|| {
        let coeffs: Vec<Complex64> = re
            .iter()
            .zip(im)
            .map(|(&a, &b)| Complex64::new(a, b))
            .collect();
        let poly = match Polynomial::new(coeffs) {
            Ok(p) => p,
            Err(e) => return report(e),
        };
        match RationalMap::from_polynomial(poly) {
            Ok(map) => {
                *out = Box::into_raw(Box::new(QcsMap { inner: map }));
                QCS_OK
            }
            Err(e) => report(e),
        }
    })
}

/// Frees a map handle; null is ignored.
///
/// # Safety
/// `map` must be a handle returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qcs_map_free(map: *mut QcsMap) {
    if !map.is_null() {
        drop(Box::from_raw(map));
    }
}

/// Degree of the map, or 0 for a null handle.
///
/// # Safety
/// `map` must be a live handle from this library or null.
#[no_mangle]
pub unsafe extern "C" fn qcs_map_degree(map: *const QcsMap) -> u32 {
    if map.is_null() {
        return 0;
    }
    (*map).inner.degree() as u32
}

/// Evaluates the map at re + i im.
///
/// # Safety
/// `map` must be a live handle; `out_re`, `out_im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qcs_map_eval(
    map: *const QcsMap,
    re: f64,
    im: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> i32 {
    if map.is_null() || out_re.is_null() || out_im.is_null() {
        set_error("null handle or output pointer");
        return QCS_NULL_ARGUMENT;
    }
    let v = (*map).inner.evaluate(Complex64::new(re, im));
    *out_re = v.re;
    *out_im = v.im;
    QCS_OK
}

/// Escape census: writes the number of finite critical points whose
/// orbits reach the escape radius within the horizon.
///
/// # Safety
/// `map` must be a live handle; `out_count` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qcs_map_escape_census(
    map: *const QcsMap,
    horizon: usize,
    escape_radius: f64,
    out_count: *mut u32,
) -> i32 {
    if map.is_null() || out_count.is_null() {
        set_error("null handle or output pointer");
        return QCS_NULL_ARGUMENT;
    }
    let map = &(*map).inner;
    guard(|| match map.escape_census(horizon, escape_radius) {
        Ok(census) => {
            *out_count = census.count as u32;
            QCS_OK
        }
        Err(e) => report(e),
    })
}

/// Iterates an orbit, writing up to `capacity` interleaved re/im pairs.
/// `out_len` receives the number of pairs written; `out_escaped` is 1 when
/// the orbit left the escape radius (its last written sample is the escape
/// iterate when it fits the capacity).
///
/// # Safety
/// `out_points` must hold `2 * capacity` doubles; `out_len` and
/// `out_escaped` must be writable; `map` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn qcs_map_orbit(
    map: *const QcsMap,
    re: f64,
    im: f64,
    horizon: usize,
    escape_radius: f64,
    out_points: *mut f64,
    capacity: usize,
    out_len: *mut usize,
    out_escaped: *mut i32,
) -> i32 {
    if map.is_null() || out_points.is_null() || out_len.is_null() || out_escaped.is_null() {
        set_error("null handle or output pointer");
        return QCS_NULL_ARGUMENT;
    }
    let orbit = (*map)
        .inner
        .iterate_orbit(Complex64::new(re, im), horizon, escape_radius);
    let n = orbit.samples.len().min(capacity);
    for (k, z) in orbit.samples.iter().take(n).enumerate() {
        *out_points.add(2 * k) = z.re;
        *out_points.add(2 * k + 1) = z.im;
    }
    *out_len = n;
    *out_escaped = orbit.escaped as i32;
    QCS_OK
}

/// Green's function of the basin of infinity at re + i im (polynomials).
///
/// # Safety
/// `map` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qcs_map_green(
    map: *const QcsMap,
    re: f64,
    im: f64,
    horizon: usize,
    out: *mut f64,
) -> i32 {
    if map.is_null() || out.is_null() {
        set_error("null handle or output pointer");
        return QCS_NULL_ARGUMENT;
    }
    if !(*map).inner.is_polynomial() {
        return report(qcsurgery::Error::NotPolynomial);
    }
    *out = (*map).inner.green_value(Complex64::new(re, im), horizon);
    QCS_OK
}

/// Modulus of the round ring {p < |z| < q}.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qcs_round_modulus(p: f64, q: f64, out: *mut f64) -> i32 {
    if out.is_null() {
        set_error("null output pointer");
        return QCS_NULL_ARGUMENT;
    }
    match qcsurgery::moduli::round_modulus(p, q) {
        Ok(m) => {
            *out = m;
            QCS_OK
        }
        Err(e) => report(e),
    }
}

/// Opaque blend-map handle.
pub struct QcsBlend {
    inner: RadialBlendMap,
}

/// Builds the radial blend map for the ring parameter p.
///
/// # Safety
/// `out` must be a valid destination pointer.
#[no_mangle]
pub unsafe extern "C" fn qcs_blend_new(p: f64, resolution: usize, out: *mut *mut QcsBlend) -> i32 {
    if out.is_null() {
        set_error("null output pointer");
        return QCS_NULL_ARGUMENT;
    }
    guard(|| match build_blend(p, resolution) {
        Ok(blend) => {
            *out = Box::into_raw(Box::new(QcsBlend { inner: blend }));
            QCS_OK
        }
        Err(e) => report(e),
    })
}

/// Frees a blend handle; null is ignored.
///
/// # Safety
/// `blend` must be a handle returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qcs_blend_free(blend: *mut QcsBlend) {
    if !blend.is_null() {
        drop(Box::from_raw(blend));
    }
}

/// Dilatation sup-norm of a blend.
///
/// # Safety
/// `blend` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qcs_blend_sup_norm(blend: *const QcsBlend, out: *mut f64) -> i32 {
    if blend.is_null() || out.is_null() {
        set_error("null handle or output pointer");
        return QCS_NULL_ARGUMENT;
    }
    *out = (*blend).inner.sup_norm();
    QCS_OK
}

/// Evaluates the blend at re + i im.
///
/// # Safety
/// `blend` must be a live handle; `out_re`, `out_im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qcs_blend_eval(
    blend: *const QcsBlend,
    re: f64,
    im: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> i32 {
    if blend.is_null() || out_re.is_null() || out_im.is_null() {
        set_error("null handle or output pointer");
        return QCS_NULL_ARGUMENT;
    }
    let v = (*blend).inner.eval(Complex64::new(re, im));
    *out_re = v.re;
    *out_im = v.im;
    QCS_OK
}

/// Runs the instability experiment from a flat key = value configuration
/// string. `out_dir` may be null for an in-memory run. On success,
/// `out_outcome` is 0 (all depths certified), 2 (hypotheses not
/// applicable), or 1 (some depth failed); `out_s_before` receives the
/// escape count of the input map.
///
/// # Safety
/// `config_text` must be a NUL-terminated string; `out_dir` likewise or
/// null; the out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn qcs_experiment_run(
    config_text: *const c_char,
    out_dir: *const c_char,
    out_outcome: *mut i32,
    out_s_before: *mut u32,
) -> i32 {
    if config_text.is_null() || out_outcome.is_null() || out_s_before.is_null() {
        set_error("null configuration or output pointer");
        return QCS_NULL_ARGUMENT;
    }
    let text = match CStr::from_ptr(config_text).to_str() {
        Ok(t) => t,
        Err(_) => {
            set_error("configuration is not valid UTF-8");
            return QCS_BAD_ARGUMENT;
        }
    };
    let dir = if out_dir.is_null() {
        None
    } else {
        match CStr::from_ptr(out_dir).to_str() {
            Ok(d) => Some(std::path::PathBuf::from(d)),
            Err(_) => {
                set_error("output directory is not valid UTF-8");
                return QCS_BAD_ARGUMENT;
            }
        }
    };
    guard(|| {
        let config = match ExperimentConfig::parse(text) {
            Ok(c) => c,
            Err(e) => return report(e),
        };
        match run_instability_experiment(&config, dir.as_deref()) {
            Ok(bundle) => {
                *out_outcome = match bundle.outcome {
                    ExperimentOutcome::Success => 0,
                    ExperimentOutcome::Partial => 1,
                    ExperimentOutcome::NotApplicable => 2,
                };
                *out_s_before = bundle.s_before as u32;
                QCS_OK
            }
            Err(e) => report(e),
        }
    })
}
