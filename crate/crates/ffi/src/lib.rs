//! C ABI over the losflow simulator and evaluation routines.
//!
//! Every fallible function returns an [`LfStatus`]. On failure a message is
//! stored per thread and can be read with [`lf_last_error`]. Handles are
//! opaque and must be released with their matching `*_free` function;
//! strings returned through out-parameters are released with
//! [`lf_string_free`].

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use libc::{c_char, c_int, size_t};
use losflow::domain::{ClassLabel, ConfusionCounts, Scenario};
use losflow::eval::{auc_rank, metric_report};
use losflow::sim::{build_report, run_simulation, SimPatient, SimReport};
use losflow::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Data = 4,
    Invariant = 5,
    Panic = 6,
    NotFound = 7,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn fail(status: LfStatus, msg: impl Into<String>) -> LfStatus {
    set_error(msg);
    status
}

fn from_error(e: Error) -> LfStatus {
    let status = match &e {
        Error::Config { .. } | Error::Json(_) => LfStatus::Config,
        Error::Invariant(_) => LfStatus::Invariant,
        Error::InvalidArgument(_) => LfStatus::InvalidArgument,
        _ => LfStatus::Data,
    };
    fail(status, e.to_string())
}

/// Runs `f`, turning panics into [`LfStatus::Panic`].
fn guard(f: impl FnOnce() -> LfStatus) -> LfStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(LfStatus::Panic, "internal panic"))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, LfStatus> {
    if p.is_null() {
        return Err(fail(LfStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(LfStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

fn to_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("no interior nul").into_raw()
}

/// Message of the last failure on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn lf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn lf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Scenario plus the patients queued for a run.
pub struct LfSimulator {
    scenario: Scenario,
    patients: Vec<SimPatient>,
}

pub struct LfReport {
    report: SimReport,
}

/// Creates a simulator from a scenario JSON document.
///
/// # Safety
/// `scenario_json` must be a valid C string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lf_simulator_new(scenario_json: *const c_char, out: *mut *mut LfSimulator) -> LfStatus {
    guard(|| {
        if out.is_null() {
            return fail(LfStatus::NullPointer, "out is null");
        }
        let text = match read_str(scenario_json, "scenario_json") {
            Ok(t) => t,
            Err(s) => return s,
        };
        let scenario: Scenario = match serde_json::from_str(text) {
            Ok(s) => s,
            Err(e) => return from_error(e.into()),
        };
        if let Err(e) = scenario.validate() {
            return from_error(e);
        }
        *out = Box::into_raw(Box::new(LfSimulator {
            scenario,
            patients: Vec::new(),
        }));
        LfStatus::Ok
    })
}

/// Queues one patient. Labels are nonzero for LS, zero for SS.
///
/// # Safety
/// `sim` must be a live handle and `encounter_id` a valid C string.
#[no_mangle]
pub unsafe extern "C" fn lf_simulator_add_patient(
    sim: *mut LfSimulator,
    encounter_id: *const c_char,
    arrival_time: f64,
    los_hours: f64,
    true_ls: c_int,
    predicted_ls: c_int,
) -> LfStatus {
    guard(|| {
        let Some(sim) = sim.as_mut() else {
            return fail(LfStatus::NullPointer, "sim is null");
        };
        let id = match read_str(encounter_id, "encounter_id") {
            Ok(t) => t,
            Err(s) => return s,
        };
        let label = |v: c_int| if v != 0 { ClassLabel::Ls } else { ClassLabel::Ss };
        sim.patients.push(SimPatient {
            encounter_id: id.to_string(),
            arrival_time,
            los_hours,
            true_label: label(true_ls),
            predicted_label: label(predicted_ls),
        });
        LfStatus::Ok
    })
}

/// Number of queued patients, or 0 for a null handle.
///
/// # Safety
/// `sim` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lf_simulator_patient_count(sim: *const LfSimulator) -> size_t {
    sim.as_ref().map_or(0, |s| s.patients.len())
}

/// Runs the queued patients. The simulator may be run again.
///
/// # Safety
/// `sim` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lf_simulator_run(sim: *const LfSimulator, out: *mut *mut LfReport) -> LfStatus {
    guard(|| {
        let Some(sim) = sim.as_ref() else {
            return fail(LfStatus::NullPointer, "sim is null");
        };
        if out.is_null() {
            return fail(LfStatus::NullPointer, "out is null");
        }
        let report = match run_simulation(&sim.scenario, &sim.patients).and_then(|o| build_report(&o)) {
            Ok(r) => r,
            Err(e) => return from_error(e),
        };
        *out = Box::into_raw(Box::new(LfReport { report }));
        LfStatus::Ok
    })
}

/// # Safety
/// `sim` must be null or a live handle, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn lf_simulator_free(sim: *mut LfSimulator) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Reads a report metric by snake_case name (e.g. `total_sterilizations`).
/// `*defined` is 0 when the metric does not apply to the run.
///
/// # Safety
/// `report` must be a live handle, `name` a valid C string, outputs writable.
#[no_mangle]
pub unsafe extern "C" fn lf_report_metric(
    report: *const LfReport,
    name: *const c_char,
    value: *mut f64,
    defined: *mut c_int,
) -> LfStatus {
    guard(|| {
        let Some(report) = report.as_ref() else {
            return fail(LfStatus::NullPointer, "report is null");
        };
        if value.is_null() || defined.is_null() {
            return fail(LfStatus::NullPointer, "output pointer is null");
        }
        let name = match read_str(name, "name") {
            Ok(t) => t,
            Err(s) => return s,
        };
        match report.report.metrics().into_iter().find(|(n, _)| *n == name) {
            Some((_, v)) => {
                *value = v.unwrap_or(f64::NAN);
                *defined = c_int::from(v.is_some());
                LfStatus::Ok
            }
            None => fail(LfStatus::NotFound, format!("unknown metric `{name}`")),
        }
    })
}

/// Serialises the full report as JSON; free with [`lf_string_free`].
///
/// # Safety
/// `report` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lf_report_to_json(report: *const LfReport, out: *mut *mut c_char) -> LfStatus {
    guard(|| {
        let Some(report) = report.as_ref() else {
            return fail(LfStatus::NullPointer, "report is null");
        };
        if out.is_null() {
            return fail(LfStatus::NullPointer, "out is null");
        }
        match serde_json::to_string(&report.report) {
            Ok(s) => {
                *out = to_c_string(s);
                LfStatus::Ok
            }
            Err(e) => from_error(e.into()),
        }
    })
}

/// # Safety
/// `report` must be null or a live handle, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn lf_report_free(report: *mut LfReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Classification metrics with LS as the positive class.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LfMetricReport {
    pub accuracy: f64,
    pub precision_ls: f64,
    pub precision_ss: f64,
    pub recall_ls: f64,
    pub recall_ss: f64,
    pub f1_ls: f64,
    pub f1_ss: f64,
    pub f1_weighted: f64,
    /// Nonzero when any ratio had a zero denominator.
    pub any_undefined: c_int,
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lf_metric_report(tp: u64, tn: u64, fp: u64, fn_: u64, out: *mut LfMetricReport) -> LfStatus {
    guard(|| {
        if out.is_null() {
            return fail(LfStatus::NullPointer, "out is null");
        }
        match metric_report(ConfusionCounts::new(tp, tn, fp, fn_)) {
            Ok(r) => {
                *out = LfMetricReport {
                    accuracy: r.accuracy,
                    precision_ls: r.precision_ls,
                    precision_ss: r.precision_ss,
                    recall_ls: r.recall_ls,
                    recall_ss: r.recall_ss,
                    f1_ls: r.f1_ls,
                    f1_ss: r.f1_ss,
                    f1_weighted: r.f1_weighted,
                    any_undefined: c_int::from(r.undefined.any()),
                };
                LfStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// ROC AUC of `scores` against labels (nonzero = LS), ties averaged.
///
/// # Safety
/// `scores` and `labels` must point to `n` readable elements; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lf_auc(scores: *const f64, labels: *const c_int, n: size_t, out: *mut f64) -> LfStatus {
    guard(|| {
        if scores.is_null() || labels.is_null() || out.is_null() {
            return fail(LfStatus::NullPointer, "null argument");
        }
        let s = std::slice::from_raw_parts(scores, n);
        let y: Vec<ClassLabel> = std::slice::from_raw_parts(labels, n)
            .iter()
            .map(|&v| if v != 0 { ClassLabel::Ls } else { ClassLabel::Ss })
            .collect();
        match auc_rank(s, &y) {
            Ok(a) => {
                *out = a;
                LfStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn lf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
