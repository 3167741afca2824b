//! C ABI for the simulator: opaque handles, integer status codes, and a
//! generated `include/uavsim.h` header (cbindgen runs from the build
//! script).
//!
//! Conventions: constructors return null on failure, every fallible call
//! returns a `UavsimStatus`, and `uavsim_last_error_message` exposes the
//! most recent error text for the calling thread (valid until the next
//! failing call on that thread). Handles must be released with the matching
//! `*_free` function exactly once.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use uavsim::config::Scenario;
use uavsim::sim::{self, Algorithm, RunOptions, RunOutput};

/// Status codes returned by fallible calls.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UavsimStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidArgument = 2,
    ParseError = 3,
    Infeasible = 4,
    IoError = 5,
    OutOfRange = 6,
    InternalError = 7,
}

/// One metrics row of a finished run.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct UavsimMetricsRecord {
    pub slot: u64,
    pub unserved_pct: f64,
    pub delay_sd_s: f64,
    pub total_bits: f64,
    pub energy_j: f64,
    /// Meaningful only when `ee_defined` is true (no movement energy spent
    /// yet otherwise).
    pub ee_bits_per_j: f64,
    pub ee_defined: bool,
}

/// Opaque scenario handle.
pub struct UavsimScenario {
    inner: Scenario,
}

/// Opaque handle to a finished run.
pub struct UavsimRun {
    inner: RunOutput,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<Vec<u8>>) {
    let c = CString::new(msg).unwrap_or_else(|_| CString::new("invalid error text").unwrap());
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &uavsim::Error) -> UavsimStatus {
    match err {
        uavsim::Error::InvalidParameter(_) => UavsimStatus::InvalidArgument,
        uavsim::Error::OutOfRegion { .. } => UavsimStatus::InvalidArgument,
        uavsim::Error::Infeasible(_) => UavsimStatus::Infeasible,
        uavsim::Error::Config(_) | uavsim::Error::Parse(_) => UavsimStatus::ParseError,
        uavsim::Error::Io(_) => UavsimStatus::IoError,
    }
}

unsafe fn cstr<'a>(ptr: *const c_char) -> Option<&'a str> {
    if ptr.is_null() {
        return None;
    }
    CStr::from_ptr(ptr).to_str().ok()
}

/// Latest error message for this thread, or null if none was recorded.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn uavsim_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| match &*e.borrow() {
        Some(c) => c.as_ptr(),
        None => ptr::null(),
    })
}

/// New scenario with the library defaults.
#[no_mangle]
pub extern "C" fn uavsim_scenario_default() -> *mut UavsimScenario {
    Box::into_raw(Box::new(UavsimScenario {
        inner: Scenario::default(),
    }))
}

/// Parse a scenario from TOML text. Returns null on error.
///
/// # Safety
/// `text` must be a valid NUL-terminated UTF-8 string.
#[no_mangle]
pub unsafe extern "C" fn uavsim_scenario_from_toml(text: *const c_char) -> *mut UavsimScenario {
    let Some(text) = cstr(text) else {
        set_error("null or non-UTF-8 TOML text");
        return ptr::null_mut();
    };
    match Scenario::from_toml(text) {
        Ok(inner) => Box::into_raw(Box::new(UavsimScenario { inner })),
        Err(e) => {
            set_error(e.to_string());
            ptr::null_mut()
        }
    }
}

/// Load a scenario from a TOML file. Returns null on error.
///
/// # Safety
/// `path` must be a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn uavsim_scenario_from_file(path: *const c_char) -> *mut UavsimScenario {
    let Some(path) = cstr(path) else {
        set_error("null or non-UTF-8 path");
        return ptr::null_mut();
    };
    match Scenario::load(Path::new(path)) {
        Ok(inner) => Box::into_raw(Box::new(UavsimScenario { inner })),
        Err(e) => {
            set_error(e.to_string());
            ptr::null_mut()
        }
    }
}

/// Override the scenario seed.
///
/// # Safety
/// `scenario` must be a live handle from a `uavsim_scenario_*` constructor.
#[no_mangle]
pub unsafe extern "C" fn uavsim_scenario_set_seed(
    scenario: *mut UavsimScenario,
    seed: u64,
) -> UavsimStatus {
    let Some(s) = scenario.as_mut() else {
        set_error("null scenario");
        return UavsimStatus::NullArgument;
    };
    s.inner.seed = seed;
    UavsimStatus::Ok
}

/// Select the assignment scheme: "proposed", "bt", "bpl" or "balanced".
///
/// # Safety
/// `scenario` must be a live handle; `name` a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn uavsim_scenario_set_algorithm(
    scenario: *mut UavsimScenario,
    name: *const c_char,
) -> UavsimStatus {
    let Some(s) = scenario.as_mut() else {
        set_error("null scenario");
        return UavsimStatus::NullArgument;
    };
    let Some(name) = cstr(name) else {
        set_error("null or non-UTF-8 algorithm name");
        return UavsimStatus::NullArgument;
    };
    match name.parse::<Algorithm>() {
        Ok(a) => {
            s.inner.algorithm = a;
            UavsimStatus::Ok
        }
        Err(e) => {
            set_error(e.to_string());
            UavsimStatus::InvalidArgument
        }
    }
}

/// Serialize the scenario back to TOML. Free with `uavsim_string_free`.
///
/// # Safety
/// `scenario` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn uavsim_scenario_to_toml(
    scenario: *const UavsimScenario,
) -> *mut c_char {
    let Some(s) = scenario.as_ref() else {
        set_error("null scenario");
        return ptr::null_mut();
    };
    match CString::new(s.inner.to_toml()) {
        Ok(c) => c.into_raw(),
        Err(_) => {
            set_error("scenario text contained an interior NUL");
            ptr::null_mut()
        }
    }
}

/// # Safety
/// `scenario` must come from a `uavsim_scenario_*` constructor and not have
/// been freed already. Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn uavsim_scenario_free(scenario: *mut UavsimScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Run the scenario with its configured algorithm. Returns null on error.
///
/// # Safety
/// `scenario` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn uavsim_run(scenario: *const UavsimScenario) -> *mut UavsimRun {
    let Some(s) = scenario.as_ref() else {
        set_error("null scenario");
        return ptr::null_mut();
    };
    let result = catch_unwind(AssertUnwindSafe(|| {
        sim::run_with_options(&s.inner, s.inner.algorithm, RunOptions::default())
    }));
    match result {
        Ok(Ok(inner)) => Box::into_raw(Box::new(UavsimRun { inner })),
        Ok(Err(e)) => {
            set_error(e.to_string());
            ptr::null_mut()
        }
        Err(_) => {
            set_error("internal panic during run");
            ptr::null_mut()
        }
    }
}

/// Number of metric records (slots) in a finished run.
///
/// # Safety
/// `run` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn uavsim_run_len(run: *const UavsimRun) -> usize {
    run.as_ref().map_or(0, |r| r.inner.metrics.len())
}

/// Copy one metrics record into `out`.
///
/// # Safety
/// `run` must be a live handle and `out` a valid destination.
#[no_mangle]
pub unsafe extern "C" fn uavsim_run_record(
    run: *const UavsimRun,
    index: usize,
    out: *mut UavsimMetricsRecord,
) -> UavsimStatus {
    let Some(r) = run.as_ref() else {
        set_error("null run");
        return UavsimStatus::NullArgument;
    };
    let Some(out) = out.as_mut() else {
        set_error("null output record");
        return UavsimStatus::NullArgument;
    };
    let Some(m) = r.inner.metrics.get(index) else {
        set_error(format!(
            "record {index} out of range ({} slots)",
            r.inner.metrics.len()
        ));
        return UavsimStatus::OutOfRange;
    };
    *out = UavsimMetricsRecord {
        slot: m.slot as u64,
        unserved_pct: m.unserved_pct,
        delay_sd_s: m.delay_sd_s,
        total_bits: m.total_bits,
        energy_j: m.energy_j,
        ee_bits_per_j: m.energy_efficiency.unwrap_or(0.0),
        ee_defined: m.energy_efficiency.is_some(),
    };
    UavsimStatus::Ok
}

/// Total fleet movement energy of the run, joules.
///
/// # Safety
/// `run` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn uavsim_run_total_energy_j(run: *const UavsimRun) -> f64 {
    run.as_ref()
        .and_then(|r| r.inner.metrics.last())
        .map_or(0.0, |m| m.energy_j)
}

/// Write the metrics CSV for this run.
///
/// # Safety
/// `run` must be a live handle; `path` a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn uavsim_run_write_metrics_csv(
    run: *const UavsimRun,
    path: *const c_char,
) -> UavsimStatus {
    let Some(r) = run.as_ref() else {
        set_error("null run");
        return UavsimStatus::NullArgument;
    };
    let Some(path) = cstr(path) else {
        set_error("null or non-UTF-8 path");
        return UavsimStatus::NullArgument;
    };
    let csv = sim::metrics_csv(r.inner.algorithm, &r.inner.metrics);
    match std::fs::write(path, csv) {
        Ok(()) => UavsimStatus::Ok,
        Err(e) => {
            set_error(e.to_string());
            UavsimStatus::IoError
        }
    }
}

/// # Safety
/// `run` must come from `uavsim_run` and not have been freed already.
/// Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn uavsim_run_free(run: *mut UavsimRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Free a string returned by this library.
///
/// # Safety
/// `text` must come from a `uavsim_*` call that documents this free
/// function. Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn uavsim_string_free(text: *mut c_char) {
    if !text.is_null() {
        drop(CString::from_raw(text));
    }
}

/// Log-distance path loss `alpha + 10 * beta * log10(d)` in dB.
///
/// # Safety
/// `out` must be a valid destination.
#[no_mangle]
pub unsafe extern "C" fn uavsim_path_loss_db(
    distance_m: f64,
    alpha_db: f64,
    beta: f64,
    out: *mut f64,
) -> UavsimStatus {
    let Some(out) = out.as_mut() else {
        set_error("null output");
        return UavsimStatus::NullArgument;
    };
    let params = uavsim::channel::ChannelParams {
        alpha_db,
        beta,
        ..uavsim::channel::ChannelParams::default()
    };
    match uavsim::channel::path_loss_db(distance_m, &params) {
        Ok(v) => {
            *out = v;
            UavsimStatus::Ok
        }
        Err(e) => {
            set_error(e.to_string());
            status_of(&e)
        }
    }
}

/// Rotary-wing propulsion power in watts at forward speed `v`, using the
/// library's default airframe parameters.
///
/// # Safety
/// `out` must be a valid destination.
#[no_mangle]
pub unsafe extern "C" fn uavsim_propulsion_power_w(
    speed_mps: f64,
    out: *mut f64,
) -> UavsimStatus {
    let Some(out) = out.as_mut() else {
        set_error("null output");
        return UavsimStatus::NullArgument;
    };
    match uavsim::energy::propulsion_power(speed_mps, &uavsim::energy::EnergyParams::default()) {
        Ok(v) => {
            *out = v;
            UavsimStatus::Ok
        }
        Err(e) => {
            set_error(e.to_string());
            status_of(&e)
        }
    }
}
