//! C ABI for `finmeas`.
//!
//! Models are opaque handles created by [`fm_model_load`] or
//! [`fm_model_from_json`] and released with [`fm_model_free`]. Every call
//! returns an [`FmStatus`]; on failure the thread-local last error holds a
//! machine-readable code and a message. Strings handed out by the library
//! must be released with [`fm_string_free`].
//!
//! Rationals cross the boundary as `p/q` strings, so no precision is lost.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use finmeas::cli::model::LoadError;
use finmeas::cli::{run_with, Model};
use finmeas::logic_bisim::validity_set;
use finmeas::measures::radon_nikodym;
use finmeas::metrics::{hutchinson_distance, prohorov_distance};
use finmeas::{arith::parse_rational, Formula, Measure};

/// Result of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FmStatus {
    Ok = 0,
    /// The library rejected the request (same meaning as CLI exit 1).
    DomainError = 1,
    /// Malformed input: bad model, unknown name, unparsable value (CLI exit 2).
    InputError = 2,
    NullPointer = 3,
    InvalidUtf8 = 4,
    Panic = 5,
}

/// Opaque handle to a validated model.
pub struct FmModel {
    model: Model,
}

struct LastError {
    code: CString,
    message: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<LastError>> = const { RefCell::new(None) };
}

fn c_string(s: &str) -> CString {
    CString::new(s.replace('\0', " ")).expect("interior NULs removed")
}

fn set_error(code: &str, message: &str) {
    LAST_ERROR.with(|e| {
        *e.borrow_mut() = Some(LastError {
            code: c_string(code),
            message: c_string(message),
        })
    });
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

type Failure = (FmStatus, String, String);

fn fail(status: FmStatus, code: &str, message: impl Into<String>) -> Failure {
    (status, code.to_string(), message.into())
}

fn domain(e: finmeas::Error) -> Failure {
    fail(FmStatus::DomainError, e.code(), e.to_string())
}

fn load_failure(e: LoadError) -> Failure {
    fail(FmStatus::InputError, e.code(), e.to_string())
}

/// Runs `body`, translating failures and panics into a status plus last error.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> FmStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => FmStatus::Ok,
        Ok(Err((status, code, message))) => {
            set_error(&code, &message);
            status
        }
        Err(_) => {
            set_error("Panic", "internal panic caught at the C boundary");
            FmStatus::Panic
        }
    }
}

/// # Safety
/// `s` must be null or point to a NUL-terminated string.
unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(fail(FmStatus::NullPointer, "NullPointer", format!("{what} is null")));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| fail(FmStatus::InvalidUtf8, "InvalidUtf8", format!("{what} is not UTF-8")))
}

/// # Safety
/// `model` must be null or a live handle.
unsafe fn read_model<'a>(model: *const FmModel) -> Result<&'a Model, Failure> {
    model
        .as_ref()
        .map(|m| &m.model)
        .ok_or_else(|| fail(FmStatus::NullPointer, "NullPointer", "model is null"))
}

/// # Safety
/// `out` must be null or valid for one pointer write.
unsafe fn write_out(out: *mut *mut c_char, text: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(fail(FmStatus::NullPointer, "NullPointer", "output pointer is null"));
    }
    *out = c_string(text).into_raw();
    Ok(())
}

fn measure<'a>(model: &'a Model, name: &str) -> Result<&'a Measure, Failure> {
    model
        .measures
        .get(name)
        .ok_or_else(|| fail(FmStatus::InputError, "Input", format!("no measure named `{name}`")))
}

/// Loads and validates a model file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn fm_model_load(path: *const c_char, out: *mut *mut FmModel) -> FmStatus {
    guard(|| {
        let path = read_str(path, "path")?;
        if out.is_null() {
            return Err(fail(FmStatus::NullPointer, "NullPointer", "output pointer is null"));
        }
        let model = Model::from_path(std::path::Path::new(path)).map_err(load_failure)?;
        *out = Box::into_raw(Box::new(FmModel { model }));
        Ok(())
    })
}

/// Parses and validates a model from JSON text.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn fm_model_from_json(json: *const c_char, out: *mut *mut FmModel) -> FmStatus {
    guard(|| {
        let json = read_str(json, "json")?;
        if out.is_null() {
            return Err(fail(FmStatus::NullPointer, "NullPointer", "output pointer is null"));
        }
        let model = Model::from_json(json).map_err(load_failure)?;
        *out = Box::into_raw(Box::new(FmModel { model }));
        Ok(())
    })
}

/// Releases a model; null is ignored.
///
/// # Safety
/// `model` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fm_model_free(model: *mut FmModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Runs one CLI command (arguments after the program name) against the
/// model and stores its report, text or JSON, in `*out`.
///
/// # Safety
/// `argv` must point to `argc` NUL-terminated strings; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn fm_execute(
    model: *const FmModel,
    argv: *const *const c_char,
    argc: usize,
    json: bool,
    out: *mut *mut c_char,
) -> FmStatus {
    guard(|| {
        let model = read_model(model)?;
        if argv.is_null() && argc > 0 {
            return Err(fail(FmStatus::NullPointer, "NullPointer", "argv is null"));
        }
        let mut args = vec!["finmeas".to_string()];
        if json {
            args.push("--json".into());
        }
        for i in 0..argc {
            args.push(read_str(*argv.add(i), "argument")?.to_string());
        }
        let outcome = run_with(args, Some(model));
        match outcome.code {
            0 => write_out(out, &outcome.stdout),
            code => {
                let text = outcome.stderr.trim_end();
                let (tag, message) = match text.strip_prefix("error[").and_then(|t| t.split_once("]: ")) {
                    Some((tag, message)) => (tag.to_string(), message.to_string()),
                    None => ("Input".to_string(), text.to_string()),
                };
                let status = if code == 1 {
                    FmStatus::DomainError
                } else {
                    FmStatus::InputError
                };
                Err((status, tag, message))
            }
        }
    })
}

/// Radon-Nikodym density dμ/dν as comma-separated `p/q` values, one per atom.
///
/// # Safety
/// String arguments must be NUL-terminated; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn fm_radon_nikodym(
    model: *const FmModel,
    num: *const c_char,
    den: *const c_char,
    out: *mut *mut c_char,
) -> FmStatus {
    guard(|| {
        let model = read_model(model)?;
        let mu = measure(model, read_str(num, "num")?)?;
        let nu = measure(model, read_str(den, "den")?)?;
        let h = radon_nikodym(mu, nu).map_err(domain)?;
        let text: Vec<String> = h.values().iter().map(|q| q.to_string()).collect();
        write_out(out, &text.join(","))
    })
}

/// Hutchinson distance H_γ(μ, ν) as a `p/q` string.
///
/// # Safety
/// String arguments must be NUL-terminated; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn fm_hutchinson(
    model: *const FmModel,
    left: *const c_char,
    right: *const c_char,
    metric: *const c_char,
    gamma: *const c_char,
    out: *mut *mut c_char,
) -> FmStatus {
    guard(|| {
        let model = read_model(model)?;
        let mu = measure(model, read_str(left, "left")?)?;
        let nu = measure(model, read_str(right, "right")?)?;
        let name = read_str(metric, "metric")?;
        let d = model
            .metrics
            .get(name)
            .ok_or_else(|| fail(FmStatus::InputError, "Input", format!("no metric named `{name}`")))?;
        let gamma = parse_rational(read_str(gamma, "gamma")?).map_err(|m| fail(FmStatus::InputError, "Input", m))?;
        let value = hutchinson_distance(mu, nu, d, &gamma).map_err(domain)?;
        write_out(out, &value.to_string())
    })
}

/// Lévy-Prohorov distance d_P(μ, ν) as a `p/q` string.
///
/// # Safety
/// String arguments must be NUL-terminated; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn fm_prohorov(
    model: *const FmModel,
    left: *const c_char,
    right: *const c_char,
    metric: *const c_char,
    out: *mut *mut c_char,
) -> FmStatus {
    guard(|| {
        let model = read_model(model)?;
        let mu = measure(model, read_str(left, "left")?)?;
        let nu = measure(model, read_str(right, "right")?)?;
        let name = read_str(metric, "metric")?;
        let d = model
            .metrics
            .get(name)
            .ok_or_else(|| fail(FmStatus::InputError, "Input", format!("no metric named `{name}`")))?;
        let value = prohorov_distance(mu, nu, d).map_err(domain)?;
        write_out(out, &value.to_string())
    })
}

/// Validity set of a formula as comma-separated point labels.
///
/// # Safety
/// String arguments must be NUL-terminated; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn fm_validity_set(
    model: *const FmModel,
    kernel: *const c_char,
    formula: *const c_char,
    out: *mut *mut c_char,
) -> FmStatus {
    guard(|| {
        let model = read_model(model)?;
        let name = read_str(kernel, "kernel")?;
        let k = model
            .kernels
            .get(name)
            .ok_or_else(|| fail(FmStatus::InputError, "Input", format!("no kernel named `{name}`")))?;
        let phi = Formula::parse(read_str(formula, "formula")?)
            .map_err(|e| fail(FmStatus::InputError, e.code(), e.to_string()))?;
        let set = validity_set(k, &phi).map_err(domain)?;
        write_out(out, &set.point_labels().join(","))
    })
}

/// Releases a string returned by this library; null is ignored.
///
/// # Safety
/// `s` must be null or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Code of the last failure on this thread (e.g. `AbsoluteContinuityViolated`),
/// or null. Valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn fm_last_error_code() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |e| e.code.as_ptr()))
}

/// Message of the last failure on this thread, or null.
#[no_mangle]
pub extern "C" fn fm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |e| e.message.as_ptr()))
}
