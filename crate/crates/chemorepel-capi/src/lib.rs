//! C ABI over the scenario runner: parse a config, run it, walk the report.
//!
//! Objects cross the boundary as opaque handles owned by this library.
//! Constructors write the handle through an out-pointer and return a
//! [`CrpStatus`]; on any non-OK status the handle is null and
//! [`crp_last_error_message`] describes the failure. Handles must be
//! released with their matching `*_free` function exactly once.
//!
//! A run that aborts numerically mid-flight still produces a report (with
//! the failure recorded and an exit code of 3), matching the CLI: only
//! errors that prevent a report at all map to a non-OK status here.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use chemorepel::scenario::{parse_config, run_scenario, ScenarioConfig, ScenarioReport, Verdict};
use chemorepel::Error;

/// Bumped on any change to the exported symbols or their semantics.
pub const CRP_ABI_VERSION: u32 = 1;

/// Outcome of a fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrpStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    Utf8 = 2,
    /// The config text failed to parse.
    Parse = 3,
    /// The config parsed but violates a documented constraint.
    Validation = 4,
    /// The numerics failed before any report could be produced.
    Numerical = 5,
    /// A file could not be read or written.
    Io = 6,
    /// A panic was caught at the boundary; state may be inconsistent.
    Internal = 7,
}

/// Opaque parsed scenario configuration.
pub struct CrpConfig(ScenarioConfig);

/// Opaque scenario report; check strings stay valid until it is freed.
pub struct CrpReport {
    report: ScenarioReport,
    names: Vec<CString>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn fail(status: CrpStatus, msg: impl std::fmt::Display) -> CrpStatus {
    let text = msg.to_string().replace('\0', " ");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = CString::new(text).unwrap_or_default());
    status
}

fn status_for(err: &Error) -> CrpStatus {
    match err {
        Error::Config { .. } => CrpStatus::Parse,
        Error::Io(_) => CrpStatus::Io,
        e if e.is_numerical() => CrpStatus::Numerical,
        _ => CrpStatus::Validation,
    }
}

fn install_config(cfg: ScenarioConfig, out: *mut *mut CrpConfig) -> CrpStatus {
    unsafe { *out = Box::into_raw(Box::new(CrpConfig(cfg))) };
    CrpStatus::Ok
}

/// ABI revision of this library; compare against `CRP_ABI_VERSION` in the
/// header the caller was compiled with.
#[no_mangle]
pub extern "C" fn crp_abi_version() -> u32 {
    CRP_ABI_VERSION
}

/// Message of the last failure on this thread, empty if none yet. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn crp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Parse a configuration from a NUL-terminated string.
///
/// # Safety
/// `text` must point to a NUL-terminated buffer and `out` to writable
/// storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn crp_config_parse(
    text: *const c_char,
    out: *mut *mut CrpConfig,
) -> CrpStatus {
    if text.is_null() || out.is_null() {
        return fail(CrpStatus::NullArgument, "crp_config_parse: null argument");
    }
    unsafe { *out = ptr::null_mut() };
    let text = match unsafe { CStr::from_ptr(text) }.to_str() {
        Ok(t) => t,
        Err(e) => return fail(CrpStatus::Utf8, format!("config text is not UTF-8: {e}")),
    };
    match parse_config(text) {
        Ok(cfg) => install_config(cfg, out),
        Err(e) => fail(status_for(&e), e),
    }
}

/// Read and parse a configuration file.
///
/// # Safety
/// `path` must point to a NUL-terminated buffer and `out` to writable
/// storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn crp_config_from_file(
    path: *const c_char,
    out: *mut *mut CrpConfig,
) -> CrpStatus {
    if path.is_null() || out.is_null() {
        return fail(CrpStatus::NullArgument, "crp_config_from_file: null argument");
    }
    unsafe { *out = ptr::null_mut() };
    let path = match unsafe { CStr::from_ptr(path) }.to_str() {
        Ok(p) => p,
        Err(e) => return fail(CrpStatus::Utf8, format!("path is not UTF-8: {e}")),
    };
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => return fail(CrpStatus::Io, format!("cannot read {path}: {e}")),
    };
    match parse_config(&text) {
        Ok(cfg) => install_config(cfg, out),
        Err(e) => fail(status_for(&e), e),
    }
}

/// Override the seed of a random initial family; configs without one are
/// left unchanged.
///
/// # Safety
/// `cfg` must be a live handle from a `crp_config_*` constructor.
#[no_mangle]
pub unsafe extern "C" fn crp_config_set_seed(cfg: *mut CrpConfig, seed: u64) -> CrpStatus {
    let Some(cfg) = (unsafe { cfg.as_mut() }) else {
        return fail(CrpStatus::NullArgument, "crp_config_set_seed: null config");
    };
    cfg.0 = cfg.0.clone().with_seed(seed);
    CrpStatus::Ok
}

/// Redirect all output files of the run.
///
/// # Safety
/// `cfg` must be a live handle and `dir` a NUL-terminated buffer.
#[no_mangle]
pub unsafe extern "C" fn crp_config_set_output_dir(
    cfg: *mut CrpConfig,
    dir: *const c_char,
) -> CrpStatus {
    let Some(cfg) = (unsafe { cfg.as_mut() }) else {
        return fail(CrpStatus::NullArgument, "crp_config_set_output_dir: null config");
    };
    if dir.is_null() {
        return fail(CrpStatus::NullArgument, "crp_config_set_output_dir: null dir");
    }
    let dir = match unsafe { CStr::from_ptr(dir) }.to_str() {
        Ok(d) => d,
        Err(e) => return fail(CrpStatus::Utf8, format!("output dir is not UTF-8: {e}")),
    };
    cfg.0.output_dir = PathBuf::from(dir);
    CrpStatus::Ok
}

/// Release a configuration handle. Null is a no-op.
///
/// # Safety
/// `cfg` must be a handle from a `crp_config_*` constructor, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn crp_config_free(cfg: *mut CrpConfig) {
    if !cfg.is_null() {
        drop(unsafe { Box::from_raw(cfg) });
    }
}

/// Run the scenario and hand back the report. Output files (report.txt,
/// CSV series) are written into the configured directory as a side effect.
///
/// # Safety
/// `cfg` must be a live handle and `out` writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn crp_run(cfg: *const CrpConfig, out: *mut *mut CrpReport) -> CrpStatus {
    let Some(cfg) = (unsafe { cfg.as_ref() }) else {
        return fail(CrpStatus::NullArgument, "crp_run: null config");
    };
    if out.is_null() {
        return fail(CrpStatus::NullArgument, "crp_run: null out pointer");
    }
    unsafe { *out = ptr::null_mut() };
    match catch_unwind(AssertUnwindSafe(|| run_scenario(&cfg.0))) {
        Ok(Ok(report)) => {
            let names = report
                .checks
                .iter()
                .map(|c| CString::new(c.name).unwrap_or_default())
                .collect();
            unsafe { *out = Box::into_raw(Box::new(CrpReport { report, names })) };
            CrpStatus::Ok
        }
        Ok(Err(e)) => fail(status_for(&e), e),
        Err(_) => fail(CrpStatus::Internal, "panic caught in crp_run"),
    }
}

/// Number of graded checks in the report; 0 for null.
///
/// # Safety
/// `report` must be null or a live handle from `crp_run`.
#[no_mangle]
pub unsafe extern "C" fn crp_report_check_count(report: *const CrpReport) -> usize {
    unsafe { report.as_ref() }.map_or(0, |r| r.report.checks.len())
}

/// Name of check `idx`, valid until the report is freed; null when out of
/// range.
///
/// # Safety
/// `report` must be null or a live handle from `crp_run`.
#[no_mangle]
pub unsafe extern "C" fn crp_report_check_name(
    report: *const CrpReport,
    idx: usize,
) -> *const c_char {
    unsafe { report.as_ref() }
        .and_then(|r| r.names.get(idx))
        .map_or(ptr::null(), |name| name.as_ptr())
}

/// Verdict of check `idx`: 0 pass, 1 fail, 2 inconclusive, -1 out of range.
///
/// # Safety
/// `report` must be null or a live handle from `crp_run`.
#[no_mangle]
pub unsafe extern "C" fn crp_report_check_verdict(
    report: *const CrpReport,
    idx: usize,
) -> c_int {
    unsafe { report.as_ref() }
        .and_then(|r| r.report.checks.get(idx))
        .map_or(-1, |c| match c.verdict {
            Verdict::Pass => 0,
            Verdict::Fail => 1,
            Verdict::Inconclusive => 2,
        })
}

/// Measured value of check `idx`; NaN when out of range.
///
/// # Safety
/// `report` must be null or a live handle from `crp_run`.
#[no_mangle]
pub unsafe extern "C" fn crp_report_check_value(report: *const CrpReport, idx: usize) -> f64 {
    unsafe { report.as_ref() }
        .and_then(|r| r.report.checks.get(idx))
        .map_or(f64::NAN, |c| c.value)
}

/// Tolerance of check `idx`; NaN when out of range.
///
/// # Safety
/// `report` must be null or a live handle from `crp_run`.
#[no_mangle]
pub unsafe extern "C" fn crp_report_check_tol(report: *const CrpReport, idx: usize) -> f64 {
    unsafe { report.as_ref() }
        .and_then(|r| r.report.checks.get(idx))
        .map_or(f64::NAN, |c| c.tol)
}

/// Process exit code the CLI would use: 0 all pass, 1 a check failed,
/// 3 numerical abort; -1 for null.
///
/// # Safety
/// `report` must be null or a live handle from `crp_run`.
#[no_mangle]
pub unsafe extern "C" fn crp_report_exit_code(report: *const CrpReport) -> c_int {
    unsafe { report.as_ref() }.map_or(-1, |r| c_int::from(r.report.exit_code()))
}

/// Full plain-text report; free with `crp_string_free`. Null on null input
/// or allocation failure.
///
/// # Safety
/// `report` must be null or a live handle from `crp_run`.
#[no_mangle]
pub unsafe extern "C" fn crp_report_render(report: *const CrpReport) -> *mut c_char {
    let Some(report) = (unsafe { report.as_ref() }) else {
        return ptr::null_mut();
    };
    match CString::new(report.report.render().replace('\0', " ")) {
        Ok(s) => s.into_raw(),
        Err(_) => ptr::null_mut(),
    }
}

/// Release a string from `crp_report_render`. Null is a no-op.
///
/// # Safety
/// `s` must come from `crp_report_render`, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn crp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Release a report handle. Null is a no-op.
///
/// # Safety
/// `report` must be a handle from `crp_run`, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn crp_report_free(report: *mut CrpReport) {
    if !report.is_null() {
        drop(unsafe { Box::from_raw(report) });
    }
}
