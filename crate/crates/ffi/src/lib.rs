//! C ABI for `dqobs`.
//!
//! Every fallible function returns a [`DqobsStatus`]. On failure a message is
//! kept per thread and can be read with [`dqobs_last_error_message`]. Objects
//! are opaque handles released with their matching `_free` function. Arrays
//! use the crate layout: quaternions scalar first, dual quaternions
//! `[real; dual]`, states `[pose; velocity]`, matrices row major.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use dqobs::dualquat::{dqmul, DualQuaternion, UnitDualQuaternion};
use dqobs::dynamics::{RelativeState, Vec16};
use dqobs::error::{RunError, ScenarioError};
use dqobs::measurement::{measure, MarkerConfig};
use dqobs::observability::lie::build_observability_matrix;
use dqobs::observability::rank::rank_report_dyn;
use dqobs::scenario::{self, emit, ObservabilityOptions, OutputFormat, RunReport, Scenario};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DqobsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Validation = 4,
    Numerical = 5,
    Io = 6,
    InvalidArgument = 7,
    Panic = 8,
}

/// Parsed and validated scenario.
pub struct DqobsScenario(Scenario);

/// Result of a simulation or observability run.
pub struct DqobsReport(RunReport);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn fail(status: DqobsStatus, msg: impl Into<String>) -> DqobsStatus {
    set_error(msg);
    status
}

fn status_of(e: &RunError) -> DqobsStatus {
    match e {
        RunError::Scenario(ScenarioError::Io { .. }) => DqobsStatus::Io,
        RunError::Scenario(ScenarioError::Parse { .. }) => DqobsStatus::Parse,
        RunError::Scenario(ScenarioError::Validation { .. }) => DqobsStatus::Validation,
        RunError::Output(_) => DqobsStatus::Io,
        other if other.exit_code() == 1 => DqobsStatus::InvalidArgument,
        _ => DqobsStatus::Numerical,
    }
}

fn guard(f: impl FnOnce() -> DqobsStatus) -> DqobsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => {
            if s == DqobsStatus::Ok {
                LAST_ERROR.with(|e| *e.borrow_mut() = None);
            }
            s
        }
        Err(_) => fail(DqobsStatus::Panic, "internal panic"),
    }
}

unsafe fn str_arg<'a>(p: *const c_char) -> Result<&'a str, DqobsStatus> {
    if p.is_null() {
        return Err(fail(DqobsStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(DqobsStatus::InvalidUtf8, "string argument is not UTF-8"))
}

unsafe fn array<'a, const N: usize>(p: *const f64) -> Result<&'a [f64; N], DqobsStatus> {
    if p.is_null() {
        return Err(fail(DqobsStatus::NullPointer, "null array argument"));
    }
    Ok(&*(p as *const [f64; N]))
}

unsafe fn array_mut<'a, const N: usize>(p: *mut f64) -> Result<&'a mut [f64; N], DqobsStatus> {
    if p.is_null() {
        return Err(fail(DqobsStatus::NullPointer, "null output array"));
    }
    Ok(&mut *(p as *mut [f64; N]))
}

fn scenario_result(r: Result<Scenario, ScenarioError>, out: *mut *mut DqobsScenario) -> DqobsStatus {
    match r {
        Ok(s) => {
            unsafe { *out = Box::into_raw(Box::new(DqobsScenario(s))) };
            DqobsStatus::Ok
        }
        Err(e) => {
            let msg = e.to_string();
            fail(status_of(&RunError::Scenario(e)), msg)
        }
    }
}

fn state_and_marker(state: &[f64; 16], marker: &[f64; 8]) -> Result<(RelativeState, MarkerConfig), DqobsStatus> {
    let x = RelativeState::from_vector16(&Vec16::from_column_slice(state))
        .map_err(|e| fail(DqobsStatus::InvalidArgument, format!("state: {e}")))?;
    let m = UnitDualQuaternion::new(DualQuaternion::from_slice(marker))
        .map_err(|e| fail(DqobsStatus::InvalidArgument, format!("marker: {e}")))?;
    Ok((x, MarkerConfig::new(0, m)))
}

/// Parses a scenario from a JSON string.
///
/// # Safety
/// `json` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dqobs_scenario_from_json(json: *const c_char, out: *mut *mut DqobsScenario) -> DqobsStatus {
    guard(|| {
        if out.is_null() {
            return fail(DqobsStatus::NullPointer, "null output handle");
        }
        match str_arg(json) {
            Ok(text) => scenario_result(Scenario::from_json_str(text), out),
            Err(s) => s,
        }
    })
}

/// Reads and parses a scenario file.
///
/// # Safety
/// `path` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dqobs_scenario_from_file(path: *const c_char, out: *mut *mut DqobsScenario) -> DqobsStatus {
    guard(|| {
        if out.is_null() {
            return fail(DqobsStatus::NullPointer, "null output handle");
        }
        match str_arg(path) {
            Ok(p) => scenario_result(scenario::parse_scenario(p), out),
            Err(s) => s,
        }
    })
}

/// # Safety
/// `s` must come from a `dqobs_scenario_from_*` call and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn dqobs_scenario_free(s: *mut DqobsScenario) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

fn report_result(r: Result<RunReport, RunError>, out: *mut *mut DqobsReport) -> DqobsStatus {
    match r {
        Ok(rep) => {
            unsafe { *out = Box::into_raw(Box::new(DqobsReport(rep))) };
            DqobsStatus::Ok
        }
        Err(e) => fail(status_of(&e), e.to_string()),
    }
}

/// Propagates the scenario.
///
/// # Safety
/// `s` must be a live scenario handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dqobs_simulate(s: *const DqobsScenario, out: *mut *mut DqobsReport) -> DqobsStatus {
    guard(|| {
        if s.is_null() || out.is_null() {
            return fail(DqobsStatus::NullPointer, "null handle");
        }
        report_result(scenario::run_simulate(&(*s).0), out)
    })
}

/// Propagates the scenario and analyses observability at `epochs` epochs,
/// optionally with the empirical Gramian.
///
/// # Safety
/// `s` must be a live scenario handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dqobs_observability(
    s: *const DqobsScenario,
    epochs: usize,
    rank_tol: f64,
    gramian: bool,
    out: *mut *mut DqobsReport,
) -> DqobsStatus {
    guard(|| {
        if s.is_null() || out.is_null() {
            return fail(DqobsStatus::NullPointer, "null handle");
        }
        let opts = ObservabilityOptions {
            epochs,
            rank_tol,
            gramian,
            sweep_samples: None,
        };
        report_result(scenario::run_observability(&(*s).0, &opts), out)
    })
}

/// Number of trajectory rows in the report.
///
/// # Safety
/// `r` must be a live report handle or null.
#[no_mangle]
pub unsafe extern "C" fn dqobs_report_len(r: *const DqobsReport) -> usize {
    if r.is_null() {
        0
    } else {
        let report = &*r;
        report.0.trajectory.len()
    }
}

/// Copies row `i` as `[t, q(4), r(3), ω(3), v(3), y(8)]`.
///
/// # Safety
/// `r` must be a live report handle and `out` point to 22 doubles.
#[no_mangle]
pub unsafe extern "C" fn dqobs_report_row(r: *const DqobsReport, i: usize, out: *mut f64) -> DqobsStatus {
    guard(|| {
        if r.is_null() {
            return fail(DqobsStatus::NullPointer, "null report");
        }
        let out = match array_mut::<22>(out) {
            Ok(o) => o,
            Err(s) => return s,
        };
        let report = &*r;
        let Some(row) = report.0.trajectory.get(i) else {
            return fail(DqobsStatus::InvalidArgument, format!("row {i} out of range"));
        };
        out[0] = row.t;
        out[1..14].copy_from_slice(&row.state);
        out[14..].copy_from_slice(&row.measurement);
        DqobsStatus::Ok
    })
}

/// Serializes the report as JSON. Free the string with [`dqobs_string_free`].
///
/// # Safety
/// `r` must be a live report handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dqobs_report_to_json(r: *const DqobsReport, out: *mut *mut c_char) -> DqobsStatus {
    guard(|| {
        if r.is_null() || out.is_null() {
            return fail(DqobsStatus::NullPointer, "null handle");
        }
        let mut buf = Vec::new();
        if let Err(e) = emit(&(*r).0, OutputFormat::Json, &mut buf) {
            return fail(DqobsStatus::Io, e.to_string());
        }
        match CString::new(buf) {
            Ok(c) => {
                *out = c.into_raw();
                DqobsStatus::Ok
            }
            Err(_) => fail(DqobsStatus::Io, "report contains a NUL byte"),
        }
    })
}

/// # Safety
/// `r` must come from `dqobs_simulate` or `dqobs_observability`.
#[no_mangle]
pub unsafe extern "C" fn dqobs_report_free(r: *mut DqobsReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// # Safety
/// `s` must come from this library.
#[no_mangle]
pub unsafe extern "C" fn dqobs_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// 16×16 observability matrix, row major, for a unit relative state and a
/// unit marker pose.
///
/// # Safety
/// `state` must point to 16 doubles, `marker` to 8, `out` to 256.
#[no_mangle]
pub unsafe extern "C" fn dqobs_observability_matrix(
    state: *const f64,
    marker: *const f64,
    out: *mut f64,
) -> DqobsStatus {
    guard(|| {
        let (state, marker, out) = match (array::<16>(state), array::<8>(marker), array_mut::<256>(out)) {
            (Ok(a), Ok(b), Ok(c)) => (a, b, c),
            _ => return DqobsStatus::NullPointer,
        };
        let (x, m) = match state_and_marker(state, marker) {
            Ok(v) => v,
            Err(s) => return s,
        };
        let o = build_observability_matrix(&x, &m);
        for i in 0..16 {
            for j in 0..16 {
                out[16 * i + j] = o.entries[(i, j)];
            }
        }
        DqobsStatus::Ok
    })
}

/// Singular values (descending) and numeric rank of a row-major 16×16
/// matrix at relative tolerance `rank_tol`.
///
/// # Safety
/// `matrix` must point to 256 doubles, `singular_values` to 16, `rank` to one
/// `size_t`.
#[no_mangle]
pub unsafe extern "C" fn dqobs_rank_report(
    matrix: *const f64,
    rank_tol: f64,
    singular_values: *mut f64,
    rank: *mut usize,
) -> DqobsStatus {
    guard(|| {
        let (m, sv) = match (array::<256>(matrix), array_mut::<16>(singular_values)) {
            (Ok(a), Ok(b)) => (a, b),
            _ => return DqobsStatus::NullPointer,
        };
        if rank.is_null() {
            return fail(DqobsStatus::NullPointer, "null rank output");
        }
        let dm = dqobs::nalgebra::DMatrix::from_row_slice(16, 16, m);
        match rank_report_dyn(&dm, rank_tol) {
            Ok(r) => {
                sv.copy_from_slice(&r.singular_values);
                *rank = r.numeric_rank;
                DqobsStatus::Ok
            }
            Err(e) => {
                let msg = e.to_string();
                fail(status_of(&RunError::Analysis(e)), msg)
            }
        }
    })
}

/// Marker pose in the camera frame, `q̂_{T/C} q̂_{M/T}`.
///
/// # Safety
/// `state` must point to 16 doubles, `marker` and `out` to 8.
#[no_mangle]
pub unsafe extern "C" fn dqobs_measure(state: *const f64, marker: *const f64, out: *mut f64) -> DqobsStatus {
    guard(|| {
        let (state, marker, out) = match (array::<16>(state), array::<8>(marker), array_mut::<8>(out)) {
            (Ok(a), Ok(b), Ok(c)) => (a, b, c),
            _ => return DqobsStatus::NullPointer,
        };
        let (x, m) = match state_and_marker(state, marker) {
            Ok(v) => v,
            Err(s) => return s,
        };
        *out = measure(&x, &m, 0.0).value.to_array();
        DqobsStatus::Ok
    })
}

/// Dual quaternion product `a b`; no unit requirement.
///
/// # Safety
/// `a`, `b` and `out` must each point to 8 doubles.
#[no_mangle]
pub unsafe extern "C" fn dqobs_dqmul(a: *const f64, b: *const f64, out: *mut f64) -> DqobsStatus {
    guard(|| {
        let (a, b, out) = match (array::<8>(a), array::<8>(b), array_mut::<8>(out)) {
            (Ok(a), Ok(b), Ok(c)) => (a, b, c),
            _ => return DqobsStatus::NullPointer,
        };
        *out = dqmul(&DualQuaternion::from_slice(a), &DualQuaternion::from_slice(b)).to_array();
        DqobsStatus::Ok
    })
}

/// Message for the last failure on this thread, or null. Valid until the
/// next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn dqobs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn dqobs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}
