//! C interface to the `friedrichs` pipeline.
//!
//! The surface is deliberately small: run a JSON configuration, inspect
//! the resulting report as JSON, read the exit code, free everything.
//! All functions are safe to call from any thread; the last error message
//! is thread-local.
//!
//! Ownership rules:
//! - `fr_run_json` hands out a report that must go back through
//!   [`fr_report_free`].
//! - Strings returned by [`fr_report_json`] and [`fr_last_error_message`]
//!   must go back through [`fr_string_free`].
//! - [`fr_version`] returns a static string; do not free it.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::os::raw::{c_char, c_int};
use std::panic::{catch_unwind, AssertUnwindSafe};

use friedrichs::config::parse_config;
use friedrichs::pipeline::run_pipeline;

/// Status of a C-API call. Values above `FR_OK` match the process exit
/// codes of the `friedrichs` binary where a correspondence exists.
#[repr(C)]
#[allow(non_camel_case_types)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum fr_status {
    /// The call succeeded and every requested check passed.
    FR_OK = 0,
    /// A pointer argument was null or otherwise unusable.
    FR_INVALID_ARGUMENT = 1,
    /// The configuration did not parse or describes an invalid model.
    FR_INVALID_CONFIG = 2,
    /// The run finished but at least one check or hypothesis failed;
    /// a report is still available.
    FR_CERTIFICATION_FAILED = 3,
    /// A fixed-point solve exhausted its iteration budget; a report is
    /// still available.
    FR_NO_CONVERGENCE = 4,
    /// An internal invariant broke. Treat the library state as poisoned.
    FR_PANIC = 5,
}

/// Completed run: the report JSON plus the summary fields needed to
/// branch without parsing it.
#[allow(non_camel_case_types)]
pub struct fr_report {
    json: CString,
    exit_code: i32,
    pass: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let message = CString::new(message.replace('\0', " "))
        .unwrap_or_else(|_| CString::new("error message unavailable").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(message));
}

fn clear_last_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

fn status_from_exit_code(code: i32) -> fr_status {
    match code {
        0 => fr_status::FR_OK,
        2 => fr_status::FR_INVALID_CONFIG,
        4 => fr_status::FR_NO_CONVERGENCE,
        _ => fr_status::FR_CERTIFICATION_FAILED,
    }
}

/// Run a JSON configuration and store the resulting report in
/// `out_report`.
///
/// On `FR_OK`, `FR_CERTIFICATION_FAILED` and `FR_NO_CONVERGENCE` a report
/// is written to `out_report`; on any other status it is set to null and
/// [`fr_last_error_message`] explains what happened.
///
/// # Safety
/// `config_json` must be a valid NUL-terminated string and `out_report`
/// a valid pointer for the duration of the call.
#[no_mangle]
pub unsafe extern "C" fn fr_run_json(
    config_json: *const c_char,
    out_report: *mut *mut fr_report,
) -> fr_status {
    clear_last_error();
    if out_report.is_null() {
        set_last_error("out_report must not be null".into());
        return fr_status::FR_INVALID_ARGUMENT;
    }
    *out_report = std::ptr::null_mut();
    if config_json.is_null() {
        set_last_error("config_json must not be null".into());
        return fr_status::FR_INVALID_ARGUMENT;
    }
    let text = match CStr::from_ptr(config_json).to_str() {
        Ok(t) => t.to_owned(),
        Err(_) => {
            set_last_error("config_json is not valid UTF-8".into());
            return fr_status::FR_INVALID_CONFIG;
        }
    };
    let outcome = catch_unwind(AssertUnwindSafe(|| {
        let config = parse_config(&text)?;
        run_pipeline(&config)
    }));
    match outcome {
        Ok(Ok(run)) => {
            let json = match CString::new(run.report.to_json()) {
                Ok(j) => j,
                Err(_) => {
                    set_last_error("report JSON contained an interior NUL".into());
                    return fr_status::FR_PANIC;
                }
            };
            if !run.report.failures.is_empty() {
                set_last_error(run.report.failures.join("; "));
            }
            let status = status_from_exit_code(run.exit_code);
            let report = Box::new(fr_report {
                json,
                exit_code: run.exit_code,
                pass: run.report.pass,
            });
            *out_report = Box::into_raw(report);
            status
        }
        Ok(Err(error)) => {
            set_last_error(error.to_string());
            status_from_exit_code(error.exit_code())
        }
        Err(_) => {
            set_last_error("internal panic".into());
            fr_status::FR_PANIC
        }
    }
}

/// Copy of the report JSON; release it with [`fr_string_free`]. Null if
/// `report` is null.
///
/// # Safety
/// `report` must be null or a pointer produced by [`fr_run_json`] that
/// has not been freed.
#[no_mangle]
pub unsafe extern "C" fn fr_report_json(report: *const fr_report) -> *mut c_char {
    if report.is_null() {
        return std::ptr::null_mut();
    }
    CString::new((*report).json.as_bytes())
        .map(CString::into_raw)
        .unwrap_or(std::ptr::null_mut())
}

/// Exit code the CLI would have returned for this run; `-1` for null.
///
/// # Safety
/// `report` must be null or a live pointer from [`fr_run_json`].
#[no_mangle]
pub unsafe extern "C" fn fr_report_exit_code(report: *const fr_report) -> c_int {
    if report.is_null() {
        return -1;
    }
    (*report).exit_code
}

/// Whether every requested check passed; `false` for null.
///
/// # Safety
/// `report` must be null or a live pointer from [`fr_run_json`].
#[no_mangle]
pub unsafe extern "C" fn fr_report_pass(report: *const fr_report) -> bool {
    if report.is_null() {
        return false;
    }
    (*report).pass
}

/// Release a report. Null is ignored.
///
/// # Safety
/// `report` must be null or a pointer from [`fr_run_json`], passed here
/// exactly once.
#[no_mangle]
pub unsafe extern "C" fn fr_report_free(report: *mut fr_report) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Copy of the most recent error message on this thread, or null if the
/// last call succeeded. Release it with [`fr_string_free`].
#[no_mangle]
pub extern "C" fn fr_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map(|m| CString::new(m.as_bytes()).map(CString::into_raw).unwrap_or(std::ptr::null_mut()))
            .unwrap_or(std::ptr::null_mut())
    })
}

/// Release a string obtained from this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string pointer from [`fr_report_json`] or
/// [`fr_last_error_message`], passed here exactly once.
#[no_mangle]
pub unsafe extern "C" fn fr_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version as a static string; do not free.
#[no_mangle]
pub extern "C" fn fr_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}
