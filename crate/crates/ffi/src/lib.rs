//! C interface to the ccs-playground engine.
//!
//! Processes are opaque handles created by [`ccsg_process_parse`] and
//! released with [`ccsg_process_free`]. Every fallible call returns a
//! [`CcsgStatus`]; on anything but `CCSG_STATUS_OK` the message is available
//! from [`ccsg_last_error`] until the next call on the same thread. Strings
//! returned through out-pointers belong to the caller and are released with
//! [`ccsg_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ccs_playground::ccs::{parse_ccs, Process, TypedProcess};
use ccs_playground::fairtest::{bot_s_ccs, fair_equiv_standard, gen_tree_tests, Verdict};
use ccs_playground::lts::{weak_bisim_bounded, BisimOptions, BisimVerdict, CcsLts, Explorer};
use ccs_playground::strategy::{translate_ccs, Arena};

/// Result of a call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CcsgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    ContextMismatch = 4,
    Panic = 5,
}

/// Outcome of a check, numbered like the command-line exit codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CcsgVerdict {
    Pass = 0,
    Fail = 1,
    Inconclusive = 2,
}

/// A parsed, well-formed process with its context.
pub struct CcsgProcess {
    inner: TypedProcess,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Failure(CcsgStatus, String);

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> CcsgStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CcsgStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal error");
            CcsgStatus::Panic
        }
    }
}

unsafe fn process<'a>(p: *const CcsgProcess, what: &str) -> Result<&'a TypedProcess, Failure> {
    p.as_ref().map(|p| &p.inner).ok_or_else(|| Failure(CcsgStatus::NullPointer, format!("{what} is null")))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| Failure(CcsgStatus::NullPointer, format!("{what} is null")))
}

fn owned(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("no interior nul").into_raw()
}

fn verdict(v: &Verdict) -> CcsgVerdict {
    match v {
        Verdict::Pass { .. } => CcsgVerdict::Pass,
        Verdict::Fail { .. } => CcsgVerdict::Fail,
        Verdict::Inconclusive { .. } => CcsgVerdict::Inconclusive,
    }
}

fn same_context(p: &TypedProcess, q: &TypedProcess) -> Result<(), Failure> {
    if p.context == q.context {
        Ok(())
    } else {
        Err(Failure(CcsgStatus::ContextMismatch, format!("contexts [{}] and [{}] differ", p.context, q.context)))
    }
}

/// Parses `[n] body` into a new handle stored in `*out_process`.
///
/// # Safety
/// `text` must be a nul-terminated string and `out_process` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ccsg_process_parse(text: *const c_char, out_process: *mut *mut CcsgProcess) -> CcsgStatus {
    guard(|| {
        let slot = out(out_process, "out_process")?;
        *slot = ptr::null_mut();
        if text.is_null() {
            return Err(Failure(CcsgStatus::NullPointer, "text is null".into()));
        }
        let text = CStr::from_ptr(text).to_str().map_err(|e| Failure(CcsgStatus::InvalidUtf8, e.to_string()))?;
        let inner = parse_ccs(text).map_err(|e| Failure(CcsgStatus::Parse, e.to_string()))?;
        *slot = Box::into_raw(Box::new(CcsgProcess { inner }));
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `p` must come from [`ccsg_process_parse`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ccsg_process_free(p: *mut CcsgProcess) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Size of the context the process was parsed at, or 0 for null.
///
/// # Safety
/// `p` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ccsg_process_context(p: *const CcsgProcess) -> usize {
    p.as_ref().map_or(0, |p| p.inner.context.0)
}

/// The process in concrete syntax, `[n] body`.
///
/// # Safety
/// `p` must be a live handle and `out_text` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ccsg_process_to_string(p: *const CcsgProcess, out_text: *mut *mut c_char) -> CcsgStatus {
    guard(|| {
        let slot = out(out_text, "out_text")?;
        *slot = owned(process(p, "process")?.to_string());
        Ok(())
    })
}

/// The translated strategy as text.
///
/// # Safety
/// `p` must be a live handle and `out_text` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ccsg_translate(p: *const CcsgProcess, out_text: *mut *mut c_char) -> CcsgStatus {
    guard(|| {
        let slot = out(out_text, "out_text")?;
        let t = process(p, "process")?;
        let mut arena = Arena::new();
        let s = translate_ccs(&mut arena, t.context, &t.process);
        *slot = owned(arena.dump(s));
        Ok(())
    })
}

/// Whether every silent path of the process can still reach success,
/// exploring at most `budget` states.
///
/// # Safety
/// `p` must be a live handle and `out_verdict` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ccsg_bot_s(p: *const CcsgProcess, budget: usize, out_verdict: *mut CcsgVerdict) -> CcsgStatus {
    guard(|| {
        let slot = out(out_verdict, "out_verdict")?;
        let t = process(p, "process")?;
        let (v, _) = bot_s_ccs(t.context, &t.process, budget);
        *slot = verdict(&v);
        Ok(())
    })
}

/// Weak bisimilarity of two processes at the same context: exact when both
/// state spaces fit in `state_cap`, else up to `depth` weak steps.
///
/// # Safety
/// `p` and `q` must be live handles and `out_verdict` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ccsg_weak_bisim(
    p: *const CcsgProcess,
    q: *const CcsgProcess,
    depth: usize,
    state_cap: usize,
    out_verdict: *mut CcsgVerdict,
) -> CcsgStatus {
    guard(|| {
        let slot = out(out_verdict, "out_verdict")?;
        let (p, q) = (process(p, "left")?, process(q, "right")?);
        same_context(p, q)?;
        let mut l = Explorer::new(CcsLts { ctx: p.context }, state_cap);
        let mut r = Explorer::new(CcsLts { ctx: q.context }, state_cap);
        let opts = BisimOptions { depth, ..BisimOptions::default() };
        *slot = match weak_bisim_bounded(&mut l, &p.process, &mut r, &q.process, opts) {
            BisimVerdict::Bisimilar { .. } => CcsgVerdict::Pass,
            BisimVerdict::NotBisimilar { .. } => CcsgVerdict::Fail,
            BisimVerdict::BudgetExceeded { .. } => CcsgVerdict::Inconclusive,
        };
        Ok(())
    })
}

/// Fair testing of two processes against the generated tree tests of the
/// given depth and width. The full report is written as JSON to
/// `*out_report` when that pointer is not null.
///
/// # Safety
/// `p` and `q` must be live handles, `out_verdict` a valid pointer and
/// `out_report` null or valid.
#[no_mangle]
pub unsafe extern "C" fn ccsg_fair_equiv_standard(
    p: *const CcsgProcess,
    q: *const CcsgProcess,
    gen_depth: usize,
    gen_width: usize,
    budget: usize,
    out_verdict: *mut CcsgVerdict,
    out_report: *mut *mut c_char,
) -> CcsgStatus {
    guard(|| {
        let slot = out(out_verdict, "out_verdict")?;
        let (p, q) = (process(p, "left")?, process(q, "right")?);
        same_context(p, q)?;
        let tests: Vec<Process> = gen_tree_tests(p.context, gen_depth, gen_width);
        let report = fair_equiv_standard(&p.process, &q.process, p.context, &tests, budget);
        *slot = verdict(&report.verdict);
        if let Some(r) = out_report.as_mut() {
            *r = owned(serde_json::to_string(&report).expect("report json"));
        }
        Ok(())
    })
}

/// The message of the last failed call on this thread, or null. Valid
/// until the next call.
#[no_mangle]
pub extern "C" fn ccsg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ccsg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
