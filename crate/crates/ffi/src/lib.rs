//! C ABI for the territory simulator.
//!
//! The surface is a handful of functions around an opaque scenario handle:
//! build one from JSON (or the defaults), inspect or validate it, run it
//! into an output directory. Every call returns a [`TerrasimStatus`]; on
//! failure a human-readable message is kept per thread and retrievable via
//! [`terrasim_last_error`] until the next call on that thread.
//!
//! Ownership rules are the usual C ones: every `*mut` returned by this
//! library is owned by the caller and must go back through the matching
//! `*_free` function, and no pointer is retained past the call it is passed
//! to. All entry points catch panics and turn them into
//! `TERRASIM_STATUS_PANIC` rather than unwinding across the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use terrasim_core::engine::{run_simulation, EngineError};
use terrasim_core::grid::{build_disk_grid, enforce_stability};
use terrasim_core::output::DirectorySink;
use terrasim_core::scenario::{load_scenario, Scenario};

/// Result of a terrasim call. Mirrors the CLI exit codes for the shared
/// cases (0 ok, 2 invalid, 3 I/O).
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerrasimStatus {
    /// The call succeeded.
    Ok = 0,
    /// The scenario failed validation or the stability gate.
    Invalid = 2,
    /// Reading input or writing output failed.
    Io = 3,
    /// A required pointer argument was null.
    NullArg = 4,
    /// An internal panic was caught at the boundary.
    Panic = 5,
}

/// Opaque scenario handle. Create with [`terrasim_scenario_default`] or
/// [`terrasim_scenario_from_json`]; destroy with [`terrasim_scenario_free`].
pub struct TerrasimScenario {
    inner: Scenario,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let sanitized = CString::new(message.replace('\0', " ")).expect("nul-free error message");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(sanitized));
}

fn clear_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

/// Run `body` with panic containment, mapping a caught panic to
/// [`TerrasimStatus::Panic`] and recording its message.
fn guarded(body: impl FnOnce() -> TerrasimStatus) -> TerrasimStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".to_string());
            set_error(format!("internal panic: {msg}"));
            TerrasimStatus::Panic
        }
    }
}

/// Read a required, nul-terminated UTF-8 argument.
///
/// # Safety
/// `ptr` must be null or point to a nul-terminated string.
unsafe fn required_str<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, TerrasimStatus> {
    if ptr.is_null() {
        set_error(format!("{what} must not be null"));
        return Err(TerrasimStatus::NullArg);
    }
    unsafe { CStr::from_ptr(ptr) }.to_str().map_err(|e| {
        set_error(format!("{what} is not valid UTF-8: {e}"));
        TerrasimStatus::Invalid
    })
}

/// The library version as a static, nul-terminated string. Never null;
/// do not free.
#[no_mangle]
pub extern "C" fn terrasim_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// The last error message recorded on this thread, or null if the most
/// recent call succeeded. The pointer stays valid until the next terrasim
/// call on the same thread; do not free it.
#[no_mangle]
pub extern "C" fn terrasim_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(ptr::null(), |msg| msg.as_ptr())
    })
}

/// Free a string returned by this library (e.g. from
/// [`terrasim_scenario_to_json`]). Null is ignored.
///
/// # Safety
/// `s` must be null or a pointer previously returned by a terrasim function
/// that documents this as its release path, and must not be used afterward.
#[no_mangle]
pub unsafe extern "C" fn terrasim_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Create a scenario handle holding the built-in defaults. Never fails.
#[no_mangle]
pub extern "C" fn terrasim_scenario_default() -> *mut TerrasimScenario {
    clear_error();
    Box::into_raw(Box::new(TerrasimScenario {
        inner: Scenario::default(),
    }))
}

/// Parse and validate a scenario from a JSON document (`"{}"` gives the
/// defaults). Returns null on failure with the reason in
/// [`terrasim_last_error`].
///
/// # Safety
/// `json` must be null or a nul-terminated string.
#[no_mangle]
pub unsafe extern "C" fn terrasim_scenario_from_json(
    json: *const c_char,
) -> *mut TerrasimScenario {
    clear_error();
    let mut handle = ptr::null_mut();
    guarded(|| {
        let text = match unsafe { required_str(json, "json") } {
            Ok(text) => text,
            Err(status) => return status,
        };
        match load_scenario(text) {
            Ok(inner) => {
                handle = Box::into_raw(Box::new(TerrasimScenario { inner }));
                TerrasimStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                TerrasimStatus::Invalid
            }
        }
    });
    handle
}

/// Serialize a scenario back to pretty-printed JSON with every key present.
/// Returns a caller-owned string (release with [`terrasim_string_free`]),
/// or null if `scenario` is null.
///
/// # Safety
/// `scenario` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn terrasim_scenario_to_json(
    scenario: *const TerrasimScenario,
) -> *mut c_char {
    clear_error();
    let mut out = ptr::null_mut();
    guarded(|| {
        let Some(handle) = (unsafe { scenario.as_ref() }) else {
            set_error("scenario must not be null".to_string());
            return TerrasimStatus::NullArg;
        };
        let json = handle.inner.to_pretty_json();
        out = CString::new(json)
            .expect("JSON contains no nul bytes")
            .into_raw();
        TerrasimStatus::Ok
    });
    out
}

/// Destroy a scenario handle. Null is ignored.
///
/// # Safety
/// `scenario` must be null or a live handle from this library, and must not
/// be used afterward.
#[no_mangle]
pub unsafe extern "C" fn terrasim_scenario_free(scenario: *mut TerrasimScenario) {
    if !scenario.is_null() {
        drop(unsafe { Box::from_raw(scenario) });
    }
}

/// Validate a scenario and its stability gate without running it.
///
/// # Safety
/// `scenario` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn terrasim_check(scenario: *const TerrasimScenario) -> TerrasimStatus {
    clear_error();
    guarded(|| {
        let Some(handle) = (unsafe { scenario.as_ref() }) else {
            set_error("scenario must not be null".to_string());
            return TerrasimStatus::NullArg;
        };
        let s = &handle.inner;
        if let Err(e) = s.validate() {
            set_error(e.to_string());
            return TerrasimStatus::Invalid;
        }
        let grid = match build_disk_grid(s.grid.radius, s.grid.nx) {
            Ok(grid) => grid,
            Err(e) => {
                set_error(e.to_string());
                return TerrasimStatus::Invalid;
            }
        };
        let report = enforce_stability(
            &s.params().expect("validated"),
            &s.schedule().expect("validated"),
            &grid,
            s.run.substeps_per_day,
        );
        if report.passed() {
            TerrasimStatus::Ok
        } else {
            set_error(report.to_string());
            TerrasimStatus::Invalid
        }
    })
}

/// Run a scenario to completion, writing `series.csv`, field snapshots, and
/// (if the scenario enables them) heatmap frames under `out_dir`.
///
/// # Safety
/// `scenario` must be null or a live handle from this library; `out_dir`
/// must be null or a nul-terminated path string.
#[no_mangle]
pub unsafe extern "C" fn terrasim_run(
    scenario: *const TerrasimScenario,
    out_dir: *const c_char,
) -> TerrasimStatus {
    clear_error();
    guarded(|| {
        let Some(handle) = (unsafe { scenario.as_ref() }) else {
            set_error("scenario must not be null".to_string());
            return TerrasimStatus::NullArg;
        };
        let out_dir = match unsafe { required_str(out_dir, "out_dir") } {
            Ok(dir) => PathBuf::from(dir),
            Err(status) => return status,
        };
        let mut sink = match DirectorySink::new(&out_dir, handle.inner.output.heatmaps) {
            Ok(sink) => sink,
            Err(e) => {
                set_error(format!("cannot prepare {}: {e}", out_dir.display()));
                return TerrasimStatus::Io;
            }
        };
        match run_simulation(&handle.inner, &mut sink) {
            Ok(_) => TerrasimStatus::Ok,
            Err(e @ EngineError::Io(_)) => {
                set_error(e.to_string());
                TerrasimStatus::Io
            }
            Err(e) => {
                set_error(e.to_string());
                TerrasimStatus::Invalid
            }
        }
    })
}
