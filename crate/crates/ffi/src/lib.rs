//! C ABI over `cochain-lab`: opaque group and module handles, cohomology
//! dimensions and the task runner. Strings are UTF-8, NUL-terminated; strings
//! returned by this library are freed with `cl_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use cochain_lab::cli::{emit_report, parse_config, run_task, ConfigError, ErrorCode, Format};
use cochain_lab::cochain::{CochainComplex, Mode};
use cochain_lab::group::{Subgroup, DEFAULT_ORDER_CAP};
use cochain_lab::module::BanachModule;
use cochain_lab::spec::{parse_finite, parse_module, FiniteSpec};
use cochain_lab::Error;

/// Result codes; task failures are not errors and come back through `out_exit`.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CLStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Spec = 4,
    Cap = 5,
    Seed = 6,
    Task = 7,
    Computation = 8,
    Panic = 9,
}

/// A finite group parsed from a group spec.
pub struct CLGroup {
    spec: FiniteSpec,
}

/// A representation of a `CLGroup`.
pub struct CLModule {
    module: BanachModule,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CLCohomology {
    pub degree: usize,
    pub dim_c: usize,
    pub dim_z: usize,
    pub dim_b: usize,
    pub dim_h: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn fail(status: CLStatus, msg: &str) -> CLStatus {
    set_error(msg);
    status
}

fn status_of(code: ErrorCode) -> CLStatus {
    match code {
        ErrorCode::Task => CLStatus::Task,
        ErrorCode::Spec => CLStatus::Spec,
        ErrorCode::Cap => CLStatus::Cap,
        ErrorCode::Seed => CLStatus::Seed,
        ErrorCode::Parse => CLStatus::Parse,
    }
}

fn from_error(e: Error) -> CLStatus {
    match e {
        Error::GroupTooLarge { .. } | Error::CapExceeded { .. } => fail(CLStatus::Cap, &e.to_string()),
        Error::Parse(_) | Error::InvalidGroup(_) | Error::InvalidRepresentation(_) | Error::NotIsometric { .. } => {
            fail(CLStatus::Spec, &e.to_string())
        }
        other => fail(CLStatus::Computation, &other.to_string()),
    }
}

fn from_config_error(e: ConfigError) -> CLStatus {
    fail(status_of(e.code), &e.to_string())
}

/// # Safety
/// `s` must be null or a valid NUL-terminated string.
unsafe fn read_json(s: *const c_char) -> Result<serde_json::Value, CLStatus> {
    if s.is_null() {
        return Err(fail(CLStatus::NullPointer, "null string argument"));
    }
    let text = CStr::from_ptr(s).to_str().map_err(|_| fail(CLStatus::InvalidUtf8, "argument is not UTF-8"))?;
    serde_json::from_str(text).map_err(|e| fail(CLStatus::Parse, &format!("bad JSON: {e}")))
}

fn guarded(f: impl FnOnce() -> CLStatus) -> CLStatus {
    set_error("");
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(CLStatus::Panic, "internal panic"))
}

/// Parses a group spec into `*out`.
///
/// # Safety
/// `json` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cl_group_from_json(json: *const c_char, out: *mut *mut CLGroup) -> CLStatus {
    guarded(|| {
        if out.is_null() {
            return fail(CLStatus::NullPointer, "null output pointer");
        }
        *out = ptr::null_mut();
        let v = match read_json(json) {
            Ok(v) => v,
            Err(s) => return s,
        };
        match parse_finite(&v, DEFAULT_ORDER_CAP) {
            Ok(spec) => {
                *out = Box::into_raw(Box::new(CLGroup { spec }));
                CLStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Order of the group, or 0 for a null handle.
///
/// # Safety
/// `g` must be null or a handle from `cl_group_from_json`.
#[no_mangle]
pub unsafe extern "C" fn cl_group_order(g: *const CLGroup) -> usize {
    g.as_ref().map_or(0, |g| g.spec.group.order())
}

/// # Safety
/// `g` must be null or a handle from `cl_group_from_json`, not freed before.
#[no_mangle]
pub unsafe extern "C" fn cl_group_free(g: *mut CLGroup) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Parses a rep spec over `group` into `*out`.
///
/// # Safety
/// `group` must be a live group handle, `json` a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cl_module_from_json(
    group: *const CLGroup,
    json: *const c_char,
    out: *mut *mut CLModule,
) -> CLStatus {
    guarded(|| {
        if out.is_null() {
            return fail(CLStatus::NullPointer, "null output pointer");
        }
        *out = ptr::null_mut();
        let Some(g) = group.as_ref() else {
            return fail(CLStatus::NullPointer, "null group handle");
        };
        let v = match read_json(json) {
            Ok(v) => v,
            Err(s) => return s,
        };
        match parse_module(&v, &g.spec) {
            Ok(module) => {
                *out = Box::into_raw(Box::new(CLModule { module }));
                CLStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Dimension of the module, or 0 for a null handle.
///
/// # Safety
/// `m` must be null or a handle from `cl_module_from_json`.
#[no_mangle]
pub unsafe extern "C" fn cl_module_dim(m: *const CLModule) -> usize {
    m.as_ref().map_or(0, |m| m.module.dim())
}

/// Exact cohomology dimensions in degree `n`.
///
/// # Safety
/// `m` must be a live module handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cl_module_cohomology(m: *const CLModule, n: usize, out: *mut CLCohomology) -> CLStatus {
    guarded(|| {
        let (Some(m), false) = (m.as_ref(), out.is_null()) else {
            return fail(CLStatus::NullPointer, "null argument");
        };
        let whole = Subgroup::whole(m.module.group());
        let report = CochainComplex::new(&m.module, &whole).and_then(|cx| cx.cohomology(n, Mode::Exact, false));
        match report {
            Ok(r) => {
                *out = CLCohomology { degree: n, dim_c: r.dim_c, dim_z: r.dim_z, dim_b: r.dim_b, dim_h: r.dim_h };
                CLStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `m` must be null or a handle from `cl_module_from_json`, not freed before.
#[no_mangle]
pub unsafe extern "C" fn cl_module_free(m: *mut CLModule) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Runs a task config (JSON or TOML) and returns the JSON report in `*out_report`
/// and the command-line exit code (0 pass, 1 fail, 3 budget exhausted) in `*out_exit`.
///
/// # Safety
/// `config` must be a valid C string; `out_report` and `out_exit` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn cl_run_task(
    config: *const c_char,
    out_report: *mut *mut c_char,
    out_exit: *mut i32,
) -> CLStatus {
    guarded(|| {
        if config.is_null() || out_report.is_null() || out_exit.is_null() {
            return fail(CLStatus::NullPointer, "null argument");
        }
        *out_report = ptr::null_mut();
        let Ok(text) = CStr::from_ptr(config).to_str() else {
            return fail(CLStatus::InvalidUtf8, "config is not UTF-8");
        };
        let cfg = match parse_config(text) {
            Ok(c) => c,
            Err(e) => return from_config_error(e),
        };
        match run_task(&cfg) {
            Ok(r) => {
                let json = emit_report(&r, Format::Json);
                *out_exit = r.status.exit_code();
                *out_report = CString::new(json).expect("reports contain no NUL").into_raw();
                CLStatus::Ok
            }
            Err(e) => from_config_error(e),
        }
    })
}

/// # Safety
/// `s` must be null or a string returned by this library, not freed before.
#[no_mangle]
pub unsafe extern "C" fn cl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message for the last non-OK status on this thread; empty if none. Valid until
/// the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn cl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}
