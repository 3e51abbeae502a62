//! C ABI for the symqt library.
//!
//! Handles are opaque pointers created and destroyed by this library; all
//! structured results cross the boundary as JSON strings allocated here and
//! released with [`symqt_string_free`]. Every entry point returns a status
//! code; on failure the message is available from [`symqt_last_error`]
//! until the next call on the same thread.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use libc::c_char;

use symqt::error::Error;
use symqt::measurement::State;
use symqt::model::{analyze, cmat_to_json, ModelDocument};
use symqt::spectrum::a_spectrum;
use symqt::triangle::{TriangleModel, Window};

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymqtStatus {
    Ok = 0,
    /// Invalid input: schema violations, unknown names, bad arguments.
    Validation = 2,
    /// A numerical residual exceeded its tolerance.
    Residual = 3,
    /// A hypothesis of the requested construction is violated by the inputs.
    Hypothesis = 4,
    /// Null pointer argument.
    NullArgument = 5,
    /// Argument was not valid UTF-8.
    Utf8 = 6,
    /// Internal panic (a bug; the message carries the payload).
    Panic = 7,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let owned = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = owned);
}

fn status_of(err: &Error) -> SymqtStatus {
    match err.exit_code() {
        3 => SymqtStatus::Residual,
        4 => SymqtStatus::Hypothesis,
        _ => SymqtStatus::Validation,
    }
}

/// Message of the most recent failure on this thread. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn symqt_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn symqt_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr() as *const c_char
}

/// Frees a string allocated by this library.
///
/// # Safety
/// `s` must be a pointer previously returned through an out-parameter of
/// this library, not yet freed. Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn symqt_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// A loaded model document (opaque).
pub struct SymqtModel {
    doc: ModelDocument,
}

/// A running triangle experiment (opaque).
pub struct SymqtTriangle {
    model: TriangleModel,
}

unsafe fn read_str<'a>(ptr: *const c_char) -> Result<&'a str, SymqtStatus> {
    if ptr.is_null() {
        set_error("null string argument");
        return Err(SymqtStatus::NullArgument);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("argument is not valid UTF-8");
        SymqtStatus::Utf8
    })
}

fn write_out_string(out: *mut *mut c_char, text: String) -> SymqtStatus {
    if out.is_null() {
        set_error("null output pointer");
        return SymqtStatus::NullArgument;
    }
    match CString::new(text) {
        Ok(s) => {
            unsafe { *out = s.into_raw() };
            SymqtStatus::Ok
        }
        Err(_) => {
            set_error("result contained an interior NUL byte");
            SymqtStatus::Panic
        }
    }
}

fn guarded<F: FnOnce() -> SymqtStatus>(f: F) -> SymqtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(&msg);
            SymqtStatus::Panic
        }
    }
}

/// Parses a model document from JSON text.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be a valid pointer.
/// On success `*out` owns the handle until [`symqt_model_free`].
#[no_mangle]
pub unsafe extern "C" fn symqt_model_from_json(
    json: *const c_char,
    out: *mut *mut SymqtModel,
) -> SymqtStatus {
    guarded(|| {
        let text = match read_str(json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        if out.is_null() {
            set_error("null output pointer");
            return SymqtStatus::NullArgument;
        }
        match ModelDocument::from_json(text) {
            Ok(doc) => {
                *out = Box::into_raw(Box::new(SymqtModel { doc }));
                SymqtStatus::Ok
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Loads a model document from a file path.
///
/// # Safety
/// As [`symqt_model_from_json`], with `path` a NUL-terminated file path.
#[no_mangle]
pub unsafe extern "C" fn symqt_model_load(
    path: *const c_char,
    out: *mut *mut SymqtModel,
) -> SymqtStatus {
    guarded(|| {
        let path_str = match read_str(path) {
            Ok(t) => t,
            Err(s) => return s,
        };
        if out.is_null() {
            set_error("null output pointer");
            return SymqtStatus::NullArgument;
        }
        match ModelDocument::load(Path::new(path_str)) {
            Ok(doc) => {
                *out = Box::into_raw(Box::new(SymqtModel { doc }));
                SymqtStatus::Ok
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Releases a model handle. Null is a no-op.
///
/// # Safety
/// `model` must come from a model constructor of this library and must not
/// be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn symqt_model_free(model: *mut SymqtModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Serializes the canonical form of the document.
///
/// # Safety
/// `model` must be a live handle; `out` receives an owned string.
#[no_mangle]
pub unsafe extern "C" fn symqt_model_to_json(
    model: *const SymqtModel,
    out: *mut *mut c_char,
) -> SymqtStatus {
    guarded(|| {
        let Some(handle) = model.as_ref() else {
            set_error("null model handle");
            return SymqtStatus::NullArgument;
        };
        write_out_string(out, handle.doc.to_json())
    })
}

/// Permissibility analysis of every parameter; the result is the same JSON
/// report the CLI prints.
///
/// # Safety
/// `model` must be a live handle; `out` receives an owned string.
#[no_mangle]
pub unsafe extern "C" fn symqt_analyze_json(
    model: *const SymqtModel,
    out: *mut *mut c_char,
) -> SymqtStatus {
    guarded(|| {
        let Some(handle) = model.as_ref() else {
            set_error("null model handle");
            return SymqtStatus::NullArgument;
        };
        match analyze(&handle.doc) {
            Ok(report) => write_out_string(out, serde_json::to_string_pretty(&report).unwrap()),
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Spectrum report (operator route) for one parameter.
///
/// # Safety
/// `model` must be a live handle, `parameter` NUL-terminated; `out`
/// receives an owned string.
#[no_mangle]
pub unsafe extern "C" fn symqt_spectrum_json(
    model: *const SymqtModel,
    parameter: *const c_char,
    out: *mut *mut c_char,
) -> SymqtStatus {
    guarded(|| {
        let Some(handle) = model.as_ref() else {
            set_error("null model handle");
            return SymqtStatus::NullArgument;
        };
        let name = match read_str(parameter) {
            Ok(t) => t,
            Err(s) => return s,
        };
        let result = (|| -> symqt::Result<String> {
            let space = handle.doc.build_state_space()?;
            let params = handle.doc.build_parameters()?;
            let theta = params.get(name).ok_or_else(|| Error::UnknownLabel {
                name: name.to_string(),
                label: "parameter".into(),
            })?;
            let encoding = handle.doc.encoding_for(theta);
            let (report, _) = a_spectrum(theta, &space, &encoding)?;
            Ok(serde_json::to_string_pretty(&report)?)
        })();
        match result {
            Ok(text) => write_out_string(out, text),
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Operator for one parameter, in the state-space basis: matrix, spectrum
/// and residuals as JSON.
///
/// # Safety
/// As [`symqt_spectrum_json`].
#[no_mangle]
pub unsafe extern "C" fn symqt_operator_json(
    model: *const SymqtModel,
    parameter: *const c_char,
    out: *mut *mut c_char,
) -> SymqtStatus {
    guarded(|| {
        let Some(handle) = model.as_ref() else {
            set_error("null model handle");
            return SymqtStatus::NullArgument;
        };
        let name = match read_str(parameter) {
            Ok(t) => t,
            Err(s) => return s,
        };
        let result = (|| -> symqt::Result<String> {
            let space = handle.doc.build_state_space()?;
            let params = handle.doc.build_parameters()?;
            let theta = params.get(name).ok_or_else(|| Error::UnknownLabel {
                name: name.to_string(),
                label: "parameter".into(),
            })?;
            let encoding = handle.doc.encoding_for(theta);
            let (report, spectral) = a_spectrum(theta, &space, &encoding)?;
            let op = spectral.operator();
            Ok(serde_json::to_string_pretty(&serde_json::json!({
                "parameter": name,
                "spectrum": report.spectrum,
                "matrix": cmat_to_json(&op.matrix),
                "hermitian": op.hermitian,
                "basis": op.tag.0,
            }))?)
        })();
        match result {
            Ok(text) => write_out_string(out, text),
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Outcome table of `param_b` measured right after `param_a = value_a`.
///
/// # Safety
/// `model` must be a live handle; the three names NUL-terminated; `out`
/// receives an owned string.
#[no_mangle]
pub unsafe extern "C" fn symqt_transition_json(
    model: *const SymqtModel,
    param_a: *const c_char,
    value_a: *const c_char,
    param_b: *const c_char,
    out: *mut *mut c_char,
) -> SymqtStatus {
    guarded(|| {
        let Some(handle) = model.as_ref() else {
            set_error("null model handle");
            return SymqtStatus::NullArgument;
        };
        let (pa, va, pb) = match (read_str(param_a), read_str(value_a), read_str(param_b)) {
            (Ok(a), Ok(v), Ok(b)) => (a, v, b),
            (Err(s), _, _) | (_, Err(s), _) | (_, _, Err(s)) => return s,
        };
        let result = (|| -> symqt::Result<String> {
            let params = handle.doc.build_parameters()?;
            let theta_a = params.get(pa).ok_or_else(|| Error::UnknownLabel {
                name: pa.to_string(),
                label: "parameter".into(),
            })?;
            let theta_b = params.get(pb).ok_or_else(|| Error::UnknownLabel {
                name: pb.to_string(),
                label: "parameter".into(),
            })?;
            let state = State::pure(theta_a, va)?;
            let table: std::collections::BTreeMap<String, f64> =
                state.outcome_distribution(theta_b).into_iter().collect();
            Ok(serde_json::to_string_pretty(&table)?)
        })();
        match result {
            Ok(text) => write_out_string(out, text),
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Exact EPR correlation at angle `u` (radians): `-cos u`.
#[no_mangle]
pub extern "C" fn symqt_epr_exact(u: f64) -> f64 {
    symqt::spin::epr_correlation_exact(u)
}

/// Monte Carlo EPR correlation estimate.
///
/// # Safety
/// `estimate` and `std_error` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn symqt_epr_mc(
    u: f64,
    n_samples: u64,
    seed: u64,
    estimate: *mut f64,
    std_error: *mut f64,
) -> SymqtStatus {
    guarded(|| {
        if estimate.is_null() || std_error.is_null() {
            set_error("null output pointer");
            return SymqtStatus::NullArgument;
        }
        match symqt::spin::epr_correlation_mc(u, n_samples as usize, seed, symqt::spin::Observer::A)
        {
            Ok((est, se, _, _)) => {
                *estimate = est;
                *std_error = se;
                SymqtStatus::Ok
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Starts a triangle experiment.
///
/// # Safety
/// `out` must be a valid pointer; the handle is owned by the caller until
/// [`symqt_triangle_free`].
#[no_mangle]
pub unsafe extern "C" fn symqt_triangle_new(
    seed: u64,
    sealed_top: bool,
    out: *mut *mut SymqtTriangle,
) -> SymqtStatus {
    guarded(|| {
        if out.is_null() {
            set_error("null output pointer");
            return SymqtStatus::NullArgument;
        }
        match TriangleModel::new(seed, sealed_top) {
            Ok(model) => {
                *out = Box::into_raw(Box::new(SymqtTriangle { model }));
                SymqtStatus::Ok
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Opens a window (`"a"`, `"b"`, `"c"` or `"top"`); the observation record
/// is returned as JSON.
///
/// # Safety
/// `triangle` must be a live handle; `window` NUL-terminated; `out`
/// receives an owned string.
#[no_mangle]
pub unsafe extern "C" fn symqt_triangle_open(
    triangle: *mut SymqtTriangle,
    window: *const c_char,
    out: *mut *mut c_char,
) -> SymqtStatus {
    guarded(|| {
        let Some(handle) = triangle.as_mut() else {
            set_error("null triangle handle");
            return SymqtStatus::NullArgument;
        };
        let name = match read_str(window) {
            Ok(t) => t,
            Err(s) => return s,
        };
        let Some(w) = Window::parse(name) else {
            set_error("unknown window; use a, b, c or top");
            return SymqtStatus::Validation;
        };
        match handle.model.open_window(w) {
            Ok(record) => write_out_string(out, serde_json::to_string(&record).unwrap()),
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Current statistical state of the experiment as JSON.
///
/// # Safety
/// `triangle` must be a live handle; `out` receives an owned string.
#[no_mangle]
pub unsafe extern "C" fn symqt_triangle_state_json(
    triangle: *const SymqtTriangle,
    out: *mut *mut c_char,
) -> SymqtStatus {
    guarded(|| {
        let Some(handle) = triangle.as_ref() else {
            set_error("null triangle handle");
            return SymqtStatus::NullArgument;
        };
        write_out_string(out, serde_json::to_string(&handle.model.state).unwrap())
    })
}

/// Releases a triangle handle. Null is a no-op.
///
/// # Safety
/// `triangle` must come from [`symqt_triangle_new`] and must not be used
/// afterwards.
#[no_mangle]
pub unsafe extern "C" fn symqt_triangle_free(triangle: *mut SymqtTriangle) {
    if !triangle.is_null() {
        drop(Box::from_raw(triangle));
    }
}
