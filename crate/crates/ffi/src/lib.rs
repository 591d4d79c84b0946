//! C interface to `auctol`.
//!
//! Instances and solutions are opaque handles owned by the caller and
//! released with the matching `_free` function. Every fallible call returns
//! an [`AuctolStatus`]; on failure [`auctol_last_error`] describes the
//! problem until the next call on the same thread. Strings returned by the
//! library are released with [`auctol_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use auctol::cli::{solve, Algo, ConstraintMode};
use auctol::instances::{load_instance, Instance, SolutionRecord};
use auctol::Error;

/// Status codes; the nonzero ones match the CLI exit codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AuctolStatus {
    Ok = 0,
    Io = 1,
    Validation = 2,
    Capacity = 3,
    NotChordal = 4,
    Violation = 5,
    /// A null pointer or non-UTF-8 string was passed in.
    InvalidArgument = 64,
    /// The library panicked; the handle arguments should not be reused.
    Internal = 70,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AuctolAlgorithm {
    Opcost = 0,
    Lropcost = 1,
    Greedy = 2,
    Exact = 3,
}

/// A validated auction instance.
pub struct AuctolInstance {
    inner: Instance,
}

/// A solution record for one instance.
pub struct AuctolSolution {
    inner: SolutionRecord,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> AuctolStatus {
    match e.exit_code() {
        1 => AuctolStatus::Io,
        2 => AuctolStatus::Validation,
        3 => AuctolStatus::Capacity,
        4 => AuctolStatus::NotChordal,
        _ => AuctolStatus::Violation,
    }
}

enum Failure {
    Arg(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> AuctolStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AuctolStatus::Ok,
        Ok(Err(Failure::Arg(msg))) => {
            set_error(msg.to_string());
            AuctolStatus::InvalidArgument
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".to_string());
            AuctolStatus::Internal
        }
    }
}

/// # Safety
/// `s` is null or a valid NUL-terminated string.
unsafe fn utf8<'a>(s: *const c_char, what: &'static str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(Failure::Arg(what));
    }
    CStr::from_ptr(s).to_str().map_err(|_| Failure::Arg(what))
}

fn out_ptr<T>(out: *mut *mut T) -> Result<(), Failure> {
    if out.is_null() {
        Err(Failure::Arg("output pointer is null"))
    } else {
        Ok(())
    }
}

/// Parses and validates an instance from JSON text.
///
/// # Safety
/// `json` is a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn auctol_instance_from_json(
    json: *const c_char,
    out: *mut *mut AuctolInstance,
) -> AuctolStatus {
    guard(|| {
        out_ptr(out)?;
        let text = utf8(json, "json is null or not UTF-8")?;
        let inner = Instance::from_json(text)?;
        *out = Box::into_raw(Box::new(AuctolInstance { inner }));
        Ok(())
    })
}

/// Reads, parses and validates an instance file.
///
/// # Safety
/// `path` is a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn auctol_instance_load(
    path: *const c_char,
    out: *mut *mut AuctolInstance,
) -> AuctolStatus {
    guard(|| {
        out_ptr(out)?;
        let path = utf8(path, "path is null or not UTF-8")?;
        let inner = load_instance(path)?;
        *out = Box::into_raw(Box::new(AuctolInstance { inner }));
        Ok(())
    })
}

/// Number of bids, or 0 for a null handle.
///
/// # Safety
/// `inst` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn auctol_instance_bid_count(inst: *const AuctolInstance) -> usize {
    inst.as_ref().map_or(0, |i| i.inner.bids.len())
}

/// # Safety
/// `inst` is null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn auctol_instance_free(inst: *mut AuctolInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Solves an instance. With `respect_constraints` zero any constraint groups
/// are ignored. `exact_cap` bounds the exact solver; 0 keeps the default.
///
/// # Safety
/// `inst` is a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn auctol_solve(
    inst: *const AuctolInstance,
    algorithm: AuctolAlgorithm,
    respect_constraints: i32,
    exact_cap: usize,
    out: *mut *mut AuctolSolution,
) -> AuctolStatus {
    guard(|| {
        out_ptr(out)?;
        let inst = inst.as_ref().ok_or(Failure::Arg("instance is null"))?;
        let algo = match algorithm {
            AuctolAlgorithm::Opcost => Algo::Opcost,
            AuctolAlgorithm::Lropcost => Algo::Lropcost,
            AuctolAlgorithm::Greedy => Algo::Greedy,
            AuctolAlgorithm::Exact => Algo::Exact,
        };
        let mode = if respect_constraints != 0 {
            ConstraintMode::Auto
        } else {
            ConstraintMode::Ignore
        };
        let cap = (exact_cap != 0).then_some(exact_cap);
        let inner = solve(&inst.inner, algo, mode, cap)?;
        *out = Box::into_raw(Box::new(AuctolSolution { inner }));
        Ok(())
    })
}

/// Total price of the selected bids, or 0 for a null handle.
///
/// # Safety
/// `sol` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn auctol_solution_revenue(sol: *const AuctolSolution) -> i64 {
    sol.as_ref().map_or(0, |s| s.inner.revenue)
}

/// Number of selected bids, or 0 for a null handle.
///
/// # Safety
/// `sol` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn auctol_solution_selected_count(sol: *const AuctolSolution) -> usize {
    sol.as_ref().map_or(0, |s| s.inner.selected.len())
}

/// Canonical JSON of the solution record, or null for a null handle.
/// Release with [`auctol_string_free`].
///
/// # Safety
/// `sol` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn auctol_solution_to_json(sol: *const AuctolSolution) -> *mut c_char {
    match sol.as_ref() {
        Some(s) => CString::new(s.inner.to_json())
            .expect("JSON has no NUL")
            .into_raw(),
        None => ptr::null_mut(),
    }
}

/// # Safety
/// `sol` is null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn auctol_solution_free(sol: *mut AuctolSolution) {
    if !sol.is_null() {
        drop(Box::from_raw(sol));
    }
}

/// # Safety
/// `s` is null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn auctol_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn auctol_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}
