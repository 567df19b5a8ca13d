//! C ABI for the lccmech engine.
//!
//! Conventions:
//! - Models are opaque handles created from JSON text or a preset name
//!   and released with [`lccmech_model_free`].
//! - Every operation returns an [`LccmechStatus`]; on success the result
//!   is written through an out-pointer as a NUL-terminated UTF-8 string
//!   that the caller releases with [`lccmech_string_free`].
//! - On failure, [`lccmech_last_error`] returns a human-readable message
//!   for the calling thread (also caller-released).
//! - Outputs never contain timestamps, so repeated calls with the same
//!   inputs are byte-identical.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};

use lccmech::dynamics::Method;
use lccmech::error::Error;
use lccmech::hj;
use lccmech::model::{self, CompiledModel};
use lccmech::ops;

/// Result codes. Mirrors the CLI exit codes where a counterpart exists.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum LccmechStatus {
    /// Operation completed and all checks passed.
    Ok = 0,
    /// Input could not be parsed or violated the model schema.
    InvalidInput = 1,
    /// Operation completed but a semantic check failed (report still
    /// written to the out-pointer).
    CheckFailed = 2,
    /// Structure degenerate at or near every sampled point.
    SingularPoint = 3,
    /// Trajectory hit a singular point mid-run (truncated CSV still
    /// written to the out-pointer).
    TrajectorySingular = 4,
    /// A required pointer argument was NULL or not valid UTF-8.
    NullPointer = 5,
}

/// Opaque compiled model.
pub struct LccmechModel {
    inner: CompiledModel,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let cleaned: String = msg.chars().filter(|c| *c != '\0').collect();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = Some(CString::new(cleaned).expect("NUL filtered"));
    });
}

fn status_of(err: &Error) -> LccmechStatus {
    match err {
        Error::Parse { .. }
        | Error::UnknownIdentifier { .. }
        | Error::Schema(_)
        | Error::UnboundVariable(_)
        | Error::Io(_) => LccmechStatus::InvalidInput,
        Error::SingularPoint(_) => LccmechStatus::SingularPoint,
        _ => LccmechStatus::CheckFailed,
    }
}

fn fail(err: Error) -> LccmechStatus {
    set_error(&err.to_string());
    status_of(&err)
}

/// # Safety
/// `ptr` must be NULL or a NUL-terminated string valid for reads.
unsafe fn read_str<'a>(ptr: *const c_char) -> Result<&'a str, LccmechStatus> {
    if ptr.is_null() {
        set_error("NULL string argument");
        return Err(LccmechStatus::NullPointer);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("string argument is not valid UTF-8");
        LccmechStatus::NullPointer
    })
}

fn write_out(out: *mut *mut c_char, text: String) -> Result<(), LccmechStatus> {
    if out.is_null() {
        set_error("NULL output pointer");
        return Err(LccmechStatus::NullPointer);
    }
    let cleaned: String = text.chars().filter(|c| *c != '\0').collect();
    let c = CString::new(cleaned).expect("NUL filtered");
    // Safety: out checked non-NULL; caller promises it is writable.
    unsafe { *out = c.into_raw() };
    Ok(())
}

/// Returns the engine version as a static string (do not free).
#[no_mangle]
pub extern "C" fn lccmech_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Returns the last error message raised on this thread, or NULL if none.
/// The caller owns the returned string and must release it with
/// `lccmech_string_free`.
#[no_mangle]
pub extern "C" fn lccmech_last_error() -> *mut c_char {
    LAST_ERROR.with(|slot| match &*slot.borrow() {
        Some(msg) => msg.clone().into_raw(),
        None => std::ptr::null_mut(),
    })
}

/// Releases a string returned by this library. NULL is a no-op.
///
/// # Safety
/// `s` must be NULL or a pointer previously returned by this library and
/// not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lccmech_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Compiles a model from JSON text into an opaque handle.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be a valid writable
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn lccmech_model_from_json(
    json: *const c_char,
    out: *mut *mut LccmechModel,
) -> LccmechStatus {
    let text = match read_str(json) {
        Ok(t) => t,
        Err(code) => return code,
    };
    if out.is_null() {
        set_error("NULL output pointer");
        return LccmechStatus::NullPointer;
    }
    match model::compile(text) {
        Ok(inner) => {
            *out = Box::into_raw(Box::new(LccmechModel { inner }));
            LccmechStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Compiles a built-in model (e.g. "oscillator") into an opaque handle.
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be a valid writable
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn lccmech_model_from_preset(
    name: *const c_char,
    out: *mut *mut LccmechModel,
) -> LccmechStatus {
    let name = match read_str(name) {
        Ok(t) => t,
        Err(code) => return code,
    };
    if out.is_null() {
        set_error("NULL output pointer");
        return LccmechStatus::NullPointer;
    }
    match model::preset(name) {
        Ok(inner) => {
            *out = Box::into_raw(Box::new(LccmechModel { inner }));
            LccmechStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Releases a model handle. NULL is a no-op.
///
/// # Safety
/// `m` must be NULL or a pointer previously returned by a model
/// constructor and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lccmech_model_free(m: *mut LccmechModel) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// # Safety
/// `m` must be a live model handle.
unsafe fn model_ref<'a>(m: *const LccmechModel) -> Result<&'a CompiledModel, LccmechStatus> {
    if m.is_null() {
        set_error("NULL model handle");
        return Err(LccmechStatus::NullPointer);
    }
    Ok(&(*m).inner)
}

/// Runs structure validation; writes a JSON report to `out_json`.
/// `samples == 0` and `seed == 0` select the model defaults.
///
/// # Safety
/// `m` must be a live model handle and `out_json` a valid writable
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn lccmech_validate(
    m: *const LccmechModel,
    samples: usize,
    seed: u64,
    out_json: *mut *mut c_char,
) -> LccmechStatus {
    let model = match model_ref(m) {
        Ok(v) => v,
        Err(code) => return code,
    };
    let samples = if samples == 0 {
        model.samples()
    } else {
        samples
    };
    let seed = if seed == 0 { model.seed() } else { seed };
    match ops::validate(model, samples, seed) {
        Ok(report) => {
            let pass = report.pass;
            if let Err(code) = write_out(out_json, report.to_json()) {
                return code;
            }
            if pass {
                LccmechStatus::Ok
            } else {
                set_error("validation checks failed; see report");
                LccmechStatus::CheckFailed
            }
        }
        Err(e) => fail(e),
    }
}

/// Integrates the evolution field; writes a CSV trajectory to `out_csv`.
/// `x0`/`x0_len` may be NULL/0 to use the model's initial point;
/// `dt <= 0`, `steps == 0`, and `method == NULL` select model defaults.
///
/// # Safety
/// `m` must be a live model handle; `x0` NULL or valid for `x0_len`
/// reads; `method` NULL or NUL-terminated; `out_csv` valid and writable.
#[no_mangle]
pub unsafe extern "C" fn lccmech_simulate(
    m: *const LccmechModel,
    x0: *const f64,
    x0_len: usize,
    dt: f64,
    steps: usize,
    method: *const c_char,
    out_csv: *mut *mut c_char,
) -> LccmechStatus {
    let model = match model_ref(m) {
        Ok(v) => v,
        Err(code) => return code,
    };
    let x0 = if x0.is_null() || x0_len == 0 {
        None
    } else {
        Some(std::slice::from_raw_parts(x0, x0_len).to_vec())
    };
    let method = if method.is_null() {
        None
    } else {
        let name = match read_str(method) {
            Ok(t) => t,
            Err(code) => return code,
        };
        match Method::parse(name) {
            Ok(mth) => Some(mth),
            Err(e) => return fail(e),
        }
    };
    let dt = if dt > 0.0 { Some(dt) } else { None };
    let steps = if steps > 0 { Some(steps) } else { None };
    match ops::simulate(model, x0, dt, steps, method, model.seed()) {
        Ok(sim) => {
            if let Err(code) = write_out(out_csv, sim.csv) {
                return code;
            }
            match sim.truncated {
                Some(reason) => {
                    set_error(&format!("trajectory truncated: {reason}"));
                    LccmechStatus::TrajectorySingular
                }
                None => LccmechStatus::Ok,
            }
        }
        Err(e) => fail(e),
    }
}

/// Evaluates the model's Hamilton-Jacobi candidate; writes a JSON report
/// to `out_json`. `regime` may be NULL or "auto" to infer the regime, or
/// one of "symplectic", "cosymplectic", "lcc".
///
/// # Safety
/// `m` must be a live model handle; `regime` NULL or NUL-terminated;
/// `out_json` valid and writable.
#[no_mangle]
pub unsafe extern "C" fn lccmech_hj_check(
    m: *const LccmechModel,
    regime: *const c_char,
    out_json: *mut *mut c_char,
) -> LccmechStatus {
    let model = match model_ref(m) {
        Ok(v) => v,
        Err(code) => return code,
    };
    let regime = if regime.is_null() {
        None
    } else {
        let name = match read_str(regime) {
            Ok(t) => t,
            Err(code) => return code,
        };
        match name {
            "auto" | "" => None,
            "symplectic" => Some(hj::Regime::Symplectic),
            "cosymplectic" => Some(hj::Regime::Cosymplectic),
            "lcc" => Some(hj::Regime::Lcc),
            other => {
                set_error(&format!(
                    "unknown regime '{other}' (auto|symplectic|cosymplectic|lcc)"
                ));
                return LccmechStatus::InvalidInput;
            }
        }
    };
    match ops::hj_check(model, regime, model.seed()) {
        Ok(outcome) => {
            let failed = outcome.closedness_failed || !outcome.report.pass;
            if let Err(code) = write_out(out_json, outcome.report.to_json()) {
                return code;
            }
            if failed {
                set_error("Hamilton-Jacobi checks failed; see report");
                LccmechStatus::CheckFailed
            } else {
                LccmechStatus::Ok
            }
        }
        Err(e) => fail(e),
    }
}

/// Evaluates the Jacobi bracket of expressions `f` and `g` on a sample
/// grid; writes a JSON report (with per-sample values) to `out_json`.
/// `samples == 0` and `seed == 0` select the model defaults.
///
/// # Safety
/// `m` must be a live model handle; `f` and `g` NUL-terminated;
/// `out_json` valid and writable.
#[no_mangle]
pub unsafe extern "C" fn lccmech_bracket(
    m: *const LccmechModel,
    f: *const c_char,
    g: *const c_char,
    samples: usize,
    seed: u64,
    out_json: *mut *mut c_char,
) -> LccmechStatus {
    let model = match model_ref(m) {
        Ok(v) => v,
        Err(code) => return code,
    };
    let f = match read_str(f) {
        Ok(t) => t,
        Err(code) => return code,
    };
    let g = match read_str(g) {
        Ok(t) => t,
        Err(code) => return code,
    };
    let samples = if samples == 0 {
        model.samples()
    } else {
        samples
    };
    let seed = if seed == 0 { model.seed() } else { seed };
    match ops::bracket(model, f, g, samples, seed) {
        Ok(outcome) => {
            let pass = outcome.report.pass;
            if let Err(code) = write_out(out_json, outcome.to_json()) {
                return code;
            }
            if pass {
                LccmechStatus::Ok
            } else {
                set_error("bracket self-checks failed; see report");
                LccmechStatus::CheckFailed
            }
        }
        Err(e) => fail(e),
    }
}
