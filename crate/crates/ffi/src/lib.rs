//! C ABI for the qpskbeam library. See `include/qpskbeam.h` for the
//! authoritative interface documentation.
//!
//! Contract notes:
//! - complex data crosses the boundary as interleaved (re, im) doubles;
//! - out-pointers are written only on success;
//! - every entry point catches panics and reports them as a status code;
//! - error messages are stored per thread and fetched with
//!   [`qpskbeam_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use num_complex::Complex64;

use qpskbeam::array::{steering_vector, ArrayGeometry, Direction};
use qpskbeam::beamformer::{
    capon_weights, coordinate_descent, greedy_sample, naive_quantize, objective, oracle_search,
    ObjectiveParams, QpskWeights,
};
use qpskbeam::error::Error;
use qpskbeam::linalg::HermitianMatrix;
use qpskbeam::policy::{gbdt_refine, load_model, GbdtModel};

pub const QPSKBEAM_OK: i32 = 0;
pub const QPSKBEAM_ERR_NULL_POINTER: i32 = 1;
pub const QPSKBEAM_ERR_INVALID_ARGUMENT: i32 = 2;
pub const QPSKBEAM_ERR_DIMENSION_MISMATCH: i32 = 3;
pub const QPSKBEAM_ERR_SINGULAR: i32 = 4;
pub const QPSKBEAM_ERR_NO_CONVERGENCE: i32 = 5;
pub const QPSKBEAM_ERR_ORACLE_TOO_LARGE: i32 = 6;
pub const QPSKBEAM_ERR_IO: i32 = 7;
pub const QPSKBEAM_ERR_PARSE: i32 = 8;
pub const QPSKBEAM_ERR_MODEL: i32 = 9;
pub const QPSKBEAM_ERR_UTF8: i32 = 10;
pub const QPSKBEAM_ERR_PANIC: i32 = 11;

pub const QPSKBEAM_METHOD_NAIVE: i32 = 0;
pub const QPSKBEAM_METHOD_ORACLE: i32 = 1;
pub const QPSKBEAM_METHOD_GREEDY: i32 = 2;
pub const QPSKBEAM_METHOD_COORD_DESCENT: i32 = 3;
pub const QPSKBEAM_METHOD_GBDT_REFINE: i32 = 4;

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).expect("NULs removed");
    });
}

fn status_of(err: &Error) -> i32 {
    match err {
        Error::Dimension(_) | Error::FeatureLength { .. } => QPSKBEAM_ERR_DIMENSION_MISMATCH,
        Error::NonFinite(_) | Error::InvalidArgument(_) | Error::SeparationUnsatisfiable { .. } => {
            QPSKBEAM_ERR_INVALID_ARGUMENT
        }
        Error::Singular(_) => QPSKBEAM_ERR_SINGULAR,
        Error::NoConvergence(_) => QPSKBEAM_ERR_NO_CONVERGENCE,
        Error::OracleTooLarge { .. } => QPSKBEAM_ERR_ORACLE_TOO_LARGE,
        Error::ModelVersion { .. } | Error::ModelInvalid(_) => QPSKBEAM_ERR_MODEL,
        Error::Io { .. } => QPSKBEAM_ERR_IO,
        Error::Parse { .. } => QPSKBEAM_ERR_PARSE,
        Error::Trial { source, .. } => status_of(source),
    }
}

/// Runs `body` with panic containment; on success clears the error slot.
fn guarded(body: impl FnOnce() -> Result<(), (i32, String)>) -> i32 {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_error("");
            QPSKBEAM_OK
        }
        Ok(Err((code, message))) => {
            set_error(&message);
            code
        }
        Err(panic) => {
            let message = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            set_error(&format!("internal panic: {message}"));
            QPSKBEAM_ERR_PANIC
        }
    }
}

fn err_of(e: Error) -> (i32, String) {
    (status_of(&e), e.to_string())
}

fn null_fail(what: &str) -> (i32, String) {
    (QPSKBEAM_ERR_NULL_POINTER, format!("{what} is NULL"))
}

// Handle type names deliberately match the C header.
#[allow(non_camel_case_types)]
pub struct qpskbeam_geometry {
    inner: ArrayGeometry,
}

#[allow(non_camel_case_types)]
pub struct qpskbeam_model {
    inner: GbdtModel,
}

#[no_mangle]
pub extern "C" fn qpskbeam_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr().cast()
}

#[no_mangle]
pub extern "C" fn qpskbeam_status_name(status: i32) -> *const c_char {
    let name: &'static str = match status {
        QPSKBEAM_OK => "ok\0",
        QPSKBEAM_ERR_NULL_POINTER => "null_pointer\0",
        QPSKBEAM_ERR_INVALID_ARGUMENT => "invalid_argument\0",
        QPSKBEAM_ERR_DIMENSION_MISMATCH => "dimension_mismatch\0",
        QPSKBEAM_ERR_SINGULAR => "singular\0",
        QPSKBEAM_ERR_NO_CONVERGENCE => "no_convergence\0",
        QPSKBEAM_ERR_ORACLE_TOO_LARGE => "oracle_too_large\0",
        QPSKBEAM_ERR_IO => "io\0",
        QPSKBEAM_ERR_PARSE => "parse\0",
        QPSKBEAM_ERR_MODEL => "model\0",
        QPSKBEAM_ERR_UTF8 => "utf8\0",
        QPSKBEAM_ERR_PANIC => "panic\0",
        _ => "unknown\0",
    };
    name.as_ptr().cast()
}

#[no_mangle]
pub extern "C" fn qpskbeam_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qpskbeam_geometry_new_uca(
    n: usize,
    out: *mut *mut qpskbeam_geometry,
) -> i32 {
    guarded(|| {
        if out.is_null() {
            return Err(null_fail("out"));
        }
        let geom = ArrayGeometry::uniform_circular(n).map_err(err_of)?;
        unsafe {
            *out = Box::into_raw(Box::new(qpskbeam_geometry { inner: geom }));
        }
        Ok(())
    })
}

/// # Safety
/// `geometry` must come from `qpskbeam_geometry_new_uca` and not already be
/// freed. NULL is a no-op.
#[no_mangle]
pub unsafe extern "C" fn qpskbeam_geometry_free(geometry: *mut qpskbeam_geometry) {
    if !geometry.is_null() {
        drop(unsafe { Box::from_raw(geometry) });
    }
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn qpskbeam_geometry_size(
    geometry: *const qpskbeam_geometry,
    out: *mut usize,
) -> i32 {
    guarded(|| {
        if geometry.is_null() {
            return Err(null_fail("geometry"));
        }
        if out.is_null() {
            return Err(null_fail("out"));
        }
        unsafe {
            *out = (*geometry).inner.len();
        }
        Ok(())
    })
}

/// # Safety
/// `out` must hold 2n doubles for an n-element geometry.
#[no_mangle]
pub unsafe extern "C" fn qpskbeam_steering_vector(
    geometry: *const qpskbeam_geometry,
    azimuth_deg: f64,
    elevation_deg: f64,
    out: *mut f64,
) -> i32 {
    guarded(|| {
        if geometry.is_null() {
            return Err(null_fail("geometry"));
        }
        if out.is_null() {
            return Err(null_fail("out"));
        }
        let geom = unsafe { &(*geometry).inner };
        let dir = Direction::new(azimuth_deg, elevation_deg).map_err(err_of)?;
        let a = steering_vector(geom, &dir);
        let view = unsafe { std::slice::from_raw_parts_mut(out, 2 * a.len()) };
        for (i, z) in a.iter().enumerate() {
            view[2 * i] = z.re;
            view[2 * i + 1] = z.im;
        }
        Ok(())
    })
}

unsafe fn read_problem(
    n: usize,
    r: *const f64,
    a: *const f64,
) -> Result<(HermitianMatrix, Vec<Complex64>), (i32, String)> {
    if n < 2 {
        return Err((
            QPSKBEAM_ERR_INVALID_ARGUMENT,
            format!("order {n} below minimum 2"),
        ));
    }
    if r.is_null() {
        return Err(null_fail("r"));
    }
    if a.is_null() {
        return Err(null_fail("a"));
    }
    let r_view = unsafe { std::slice::from_raw_parts(r, 2 * n * n) };
    let a_view = unsafe { std::slice::from_raw_parts(a, 2 * n) };
    let entries: Vec<Complex64> = r_view
        .chunks_exact(2)
        .map(|p| Complex64::new(p[0], p[1]))
        .collect();
    let matrix = HermitianMatrix::new(n, entries).map_err(err_of)?;
    let steer: Vec<Complex64> = a_view
        .chunks_exact(2)
        .map(|p| Complex64::new(p[0], p[1]))
        .collect();
    Ok((matrix, steer))
}

/// # Safety
/// `r` must hold 2nn doubles, `a` and `out_w` 2n doubles.
#[no_mangle]
pub unsafe extern "C" fn qpskbeam_capon_weights(
    n: usize,
    r: *const f64,
    a: *const f64,
    alpha: f64,
    loading_scale: f64,
    out_w: *mut f64,
) -> i32 {
    guarded(|| {
        if out_w.is_null() {
            return Err(null_fail("out_w"));
        }
        let (matrix, steer) = unsafe { read_problem(n, r, a)? };
        let params = ObjectiveParams {
            alpha,
            loading_scale,
        };
        let w = capon_weights(&matrix, &steer, &params).map_err(err_of)?;
        let view = unsafe { std::slice::from_raw_parts_mut(out_w, 2 * n) };
        for (i, z) in w.iter().enumerate() {
            view[2 * i] = z.re;
            view[2 * i + 1] = z.im;
        }
        Ok(())
    })
}

/// # Safety
/// `path` must be a valid NUL-terminated string, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qpskbeam_model_load(
    path: *const c_char,
    out: *mut *mut qpskbeam_model,
) -> i32 {
    guarded(|| {
        if path.is_null() {
            return Err(null_fail("path"));
        }
        if out.is_null() {
            return Err(null_fail("out"));
        }
        let path = unsafe { CStr::from_ptr(path) }
            .to_str()
            .map_err(|_| (QPSKBEAM_ERR_UTF8, "path is not valid UTF-8".to_string()))?;
        let model = load_model(Path::new(path)).map_err(err_of)?;
        unsafe {
            *out = Box::into_raw(Box::new(qpskbeam_model { inner: model }));
        }
        Ok(())
    })
}

/// # Safety
/// `model` must come from `qpskbeam_model_load` and not already be freed.
/// NULL is a no-op.
#[no_mangle]
pub unsafe extern "C" fn qpskbeam_model_free(model: *mut qpskbeam_model) {
    if !model.is_null() {
        drop(unsafe { Box::from_raw(model) });
    }
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn qpskbeam_model_antennas(
    model: *const qpskbeam_model,
    out: *mut usize,
) -> i32 {
    guarded(|| {
        if model.is_null() {
            return Err(null_fail("model"));
        }
        if out.is_null() {
            return Err(null_fail("out"));
        }
        unsafe {
            *out = (*model).inner.n_antennas;
        }
        Ok(())
    })
}

/// # Safety
/// Array arguments must match the sizes documented in the header;
/// `out_symbols` must hold n bytes; `out_objective` may be NULL.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn qpskbeam_solve(
    method: i32,
    n: usize,
    r: *const f64,
    a: *const f64,
    alpha: f64,
    loading_scale: f64,
    greedy_samples: usize,
    sweeps: usize,
    seed: u64,
    model: *const qpskbeam_model,
    out_symbols: *mut u8,
    out_objective: *mut f64,
) -> i32 {
    guarded(|| {
        if out_symbols.is_null() {
            return Err(null_fail("out_symbols"));
        }
        let (matrix, steer) = unsafe { read_problem(n, r, a)? };
        let params = ObjectiveParams {
            alpha,
            loading_scale,
        };
        params.validate().map_err(err_of)?;
        let solved: QpskWeights = match method {
            QPSKBEAM_METHOD_NAIVE => {
                let cont = capon_weights(&matrix, &steer, &params).map_err(err_of)?;
                naive_quantize(&cont)
            }
            QPSKBEAM_METHOD_ORACLE => oracle_search(&matrix, &steer, &params).map_err(err_of)?,
            QPSKBEAM_METHOD_GREEDY => {
                greedy_sample(&matrix, &steer, &params, greedy_samples, seed).map_err(err_of)?
            }
            QPSKBEAM_METHOD_COORD_DESCENT => {
                if sweeps == 0 {
                    return Err((
                        QPSKBEAM_ERR_INVALID_ARGUMENT,
                        "sweeps must be >= 1".to_string(),
                    ));
                }
                let cont = capon_weights(&matrix, &steer, &params).map_err(err_of)?;
                let init = naive_quantize(&cont);
                coordinate_descent(&init, &matrix, &steer, &params, sweeps)
            }
            QPSKBEAM_METHOD_GBDT_REFINE => {
                if model.is_null() {
                    return Err((
                        QPSKBEAM_ERR_NULL_POINTER,
                        "model is NULL but method is gbdt_refine".to_string(),
                    ));
                }
                if sweeps == 0 {
                    return Err((
                        QPSKBEAM_ERR_INVALID_ARGUMENT,
                        "sweeps must be >= 1".to_string(),
                    ));
                }
                let m = unsafe { &(*model).inner };
                gbdt_refine(m, &matrix, &steer, &params, sweeps).map_err(err_of)?
            }
            other => {
                return Err((
                    QPSKBEAM_ERR_INVALID_ARGUMENT,
                    format!("unknown method code {other}"),
                ));
            }
        };
        let obj = objective(&solved, &matrix, &steer, &params);
        let out = unsafe { std::slice::from_raw_parts_mut(out_symbols, n) };
        out.copy_from_slice(solved.symbols());
        if !out_objective.is_null() {
            unsafe {
                *out_objective = obj;
            }
        }
        Ok(())
    })
}
