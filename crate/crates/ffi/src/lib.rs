//! C interface to jmutant.
//!
//! Every fallible function returns a [`JmStatus`]; on failure the message is
//! available from [`jm_last_error_message`] on the same thread. Strings
//! handed out by the library are freed with [`jm_string_free`], handles with
//! their own `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use jmutant::executor::Status;
use jmutant::java::{parse_source, SourceFile};
use jmutant::mutation::{enumerate_mutants, parse_operator_list, render_mutant, Mutant, MutantId};
use jmutant::results::compute_coverage;
use jmutant::subsumption::{build_graph, export_dot, KillMatrix, MutantKey};
use jmutant::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JmStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    UnknownOperator = 4,
    OutOfRange = 5,
    InvalidArgument = 6,
    Internal = 99,
}

/// Outcome of one mutant, for coverage computation.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JmMutantStatus {
    Killed = 0,
    KilledTimeout = 1,
    Survived = 2,
    Invalid = 3,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct JmCoverage {
    pub killed: usize,
    pub total_valid: usize,
    /// Killed over valid, or a negative value when nothing is valid.
    pub ratio: f64,
}

/// Mutants of one source file.
pub struct JmMutantSet {
    file: SourceFile,
    mutants: Vec<Mutant>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn fail(status: JmStatus, msg: impl Into<String>) -> JmStatus {
    set_error(msg);
    status
}

fn status_of(e: &Error) -> JmStatus {
    match e {
        Error::Parse { .. } => JmStatus::ParseError,
        Error::UnknownOperator(_) => JmStatus::UnknownOperator,
        _ => JmStatus::Internal,
    }
}

fn guard(f: impl FnOnce() -> JmStatus) -> JmStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    catch_unwind(AssertUnwindSafe(f))
        .unwrap_or_else(|_| fail(JmStatus::Internal, "panic inside jmutant"))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, JmStatus> {
    if p.is_null() {
        return Err(fail(JmStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(JmStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

fn hand_out(text: Vec<u8>, out: *mut *mut c_char) -> JmStatus {
    match CString::new(text) {
        Ok(s) => {
            // SAFETY: callers check `out` for null before getting here.
            unsafe { *out = s.into_raw() };
            JmStatus::Ok
        }
        Err(_) => fail(JmStatus::InvalidArgument, "text contains a NUL byte"),
    }
}

/// Message for the last failed call on this thread, or null. Valid until
/// the next call into the library.
#[no_mangle]
pub extern "C" fn jm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn jm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Coverage of `n` outcomes.
///
/// # Safety
/// `statuses` must point to `n` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn jm_coverage(
    statuses: *const JmMutantStatus,
    n: usize,
    out: *mut JmCoverage,
) -> JmStatus {
    guard(|| {
        if out.is_null() || (statuses.is_null() && n > 0) {
            return fail(JmStatus::NullArgument, "null argument");
        }
        let slice = if n == 0 {
            &[][..]
        } else {
            std::slice::from_raw_parts(statuses, n)
        };
        let cov = compute_coverage(slice.iter().map(|s| match s {
            JmMutantStatus::Killed => Status::Killed,
            JmMutantStatus::KilledTimeout => Status::KilledTimeout,
            JmMutantStatus::Survived => Status::Survived,
            JmMutantStatus::Invalid => Status::Invalid,
        }));
        *out = JmCoverage {
            killed: cov.killed,
            total_valid: cov.total_valid,
            ratio: cov.coverage().unwrap_or(-1.0),
        };
        JmStatus::Ok
    })
}

/// Parses `source` and enumerates its mutants. `operators` is a comma list
/// as on the command line; null means all.
///
/// # Safety
/// String arguments must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn jm_mutants_from_source(
    path: *const c_char,
    source: *const c_char,
    operators: *const c_char,
    out: *mut *mut JmMutantSet,
) -> JmStatus {
    guard(|| {
        if out.is_null() {
            return fail(JmStatus::NullArgument, "out is null");
        }
        let (path, source) = match (read_str(path, "path"), read_str(source, "source")) {
            (Ok(p), Ok(s)) => (p, s),
            (Err(e), _) | (_, Err(e)) => return e,
        };
        let ops = if operators.is_null() {
            "all"
        } else {
            match read_str(operators, "operators") {
                Ok(s) => s,
                Err(e) => return e,
            }
        };
        let enabled = match parse_operator_list(ops) {
            Ok(v) => v.into_iter().collect(),
            Err(e) => return fail(status_of(&e), e.to_string()),
        };
        let file = SourceFile::new(path, source);
        let tree = match parse_source(&file) {
            Ok(t) => t,
            Err(e) => return fail(status_of(&e), e.to_string()),
        };
        let mutants = enumerate_mutants(&tree, &file, &enabled);
        *out = Box::into_raw(Box::new(JmMutantSet { file, mutants }));
        JmStatus::Ok
    })
}

/// Number of mutants in the set; 0 for null.
///
/// # Safety
/// `set` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn jm_mutants_count(set: *const JmMutantSet) -> usize {
    set.as_ref().map_or(0, |s| s.mutants.len())
}

/// Full mutant file (header and body) for the mutant at `index`.
///
/// # Safety
/// `set` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn jm_mutant_render(
    set: *const JmMutantSet,
    index: usize,
    out: *mut *mut c_char,
) -> JmStatus {
    guard(|| {
        let Some(set) = set.as_ref() else {
            return fail(JmStatus::NullArgument, "set is null");
        };
        if out.is_null() {
            return fail(JmStatus::NullArgument, "out is null");
        }
        let Some(m) = set.mutants.get(index) else {
            return fail(
                JmStatus::OutOfRange,
                format!("index {index} of {}", set.mutants.len()),
            );
        };
        match render_mutant(&set.file, m) {
            Ok(bytes) => hand_out(bytes, out),
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// All mutants of the set as a JSON array.
///
/// # Safety
/// `set` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn jm_mutants_json(
    set: *const JmMutantSet,
    out: *mut *mut c_char,
) -> JmStatus {
    guard(|| {
        let Some(set) = set.as_ref() else {
            return fail(JmStatus::NullArgument, "set is null");
        };
        if out.is_null() {
            return fail(JmStatus::NullArgument, "out is null");
        }
        match serde_json::to_vec(&set.mutants) {
            Ok(bytes) => hand_out(bytes, out),
            Err(e) => fail(JmStatus::Internal, e.to_string()),
        }
    })
}

/// # Safety
/// `set` must be null or a live handle, which is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn jm_mutants_free(set: *mut JmMutantSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// Subsumption graph of a kill matrix, in Graphviz syntax. `kills` is row
/// major, one row of `n_tests` bytes per mutant, non-zero meaning killed.
/// Mutants are named `1` to `n_mutants`.
///
/// # Safety
/// `kills` must point to `n_mutants * n_tests` bytes; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn jm_subsumption_dot(
    kills: *const u8,
    n_mutants: usize,
    n_tests: usize,
    out: *mut *mut c_char,
) -> JmStatus {
    guard(|| {
        let Some(cells) = n_mutants.checked_mul(n_tests) else {
            return fail(JmStatus::InvalidArgument, "matrix too large");
        };
        if out.is_null() || (kills.is_null() && cells > 0) {
            return fail(JmStatus::NullArgument, "null argument");
        }
        let Ok(ids) = (1..=n_mutants)
            .map(u32::try_from)
            .collect::<Result<Vec<u32>, _>>()
        else {
            return fail(JmStatus::InvalidArgument, "too many mutants");
        };
        let flat = if cells == 0 {
            &[][..]
        } else {
            std::slice::from_raw_parts(kills, cells)
        };
        let rows = (0..n_mutants)
            .map(|m| {
                flat[m * n_tests..(m + 1) * n_tests]
                    .iter()
                    .map(|b| *b != 0)
                    .collect()
            })
            .collect();
        let matrix = match KillMatrix::from_rows(
            ids.into_iter()
                .map(|i| MutantKey::new("", MutantId::First(i)))
                .collect(),
            (1..=n_tests).map(|t| format!("t{t}")).collect(),
            rows,
        ) {
            Ok(m) => m,
            Err(e) => return fail(JmStatus::InvalidArgument, e.to_string()),
        };
        hand_out(export_dot(&build_graph(&matrix)).into_bytes(), out)
    })
}
