//! C ABI for `bqt-core`.
//!
//! Every function returns a [`BqtStatus`]; results go through out-pointers.
//! Objects are opaque heap handles released with the matching `*_free`.
//! After a failure, [`bqt_last_error`] describes it for the calling thread.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use libc::{c_char, c_double, c_int, size_t};

use bqt_core::analytic::{gadc_error, isotropic_error, no_resource_error, Branch};
use bqt_core::json::parse_state;
use bqt_core::qcore::{max_entangled_state, BipartiteState, DensityMatrix};
use bqt_core::resources::{gadc_resource_state, isotropic_state, GadcParams, IsotropicParams};
use bqt_core::sdp::{ppt_simulation_error, SdpSolution, SolveStatus};
use bqt_core::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BqtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    DimensionMismatch = 3,
    InvalidState = 4,
    Solver = 5,
    Json = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BqtSolveStatus {
    Optimal = 0,
    NearOptimal = 1,
    Infeasible = 2,
    NumericalFailure = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BqtBranch {
    NoEntanglement = 0,
    MidDimension = 1,
    HighDimension = 2,
}

/// POVM element selector for [`bqt_solution_witness`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BqtPovmElement {
    K = 0,
    L = 1,
    N = 2,
}

/// Opaque bipartite state.
pub struct BqtState(BipartiteState);

/// Opaque simulation-error solution.
pub struct BqtSolution(SdpSolution);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> BqtStatus {
    match e {
        Error::Parameter { .. } => BqtStatus::InvalidParameter,
        Error::DimensionMismatch(_) => BqtStatus::DimensionMismatch,
        Error::InvalidState(_) | Error::InvalidChannel(_) | Error::InvalidProgram(_) => BqtStatus::InvalidState,
        Error::Json(_) | Error::Io(_) => BqtStatus::Json,
        Error::Solver(_) | Error::Linalg(_) => BqtStatus::Solver,
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (BqtStatus, String)>) -> BqtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BqtStatus::Ok,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("panic inside bqt".into());
            BqtStatus::Panic
        }
    }
}

fn lift<T>(r: bqt_core::Result<T>) -> Result<T, (BqtStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null() -> (BqtStatus, String) {
    (BqtStatus::NullPointer, "null pointer argument".into())
}

unsafe fn put<T>(out: *mut T, v: T) -> Result<(), (BqtStatus, String)> {
    if out.is_null() {
        return Err(null());
    }
    out.write(v);
    Ok(())
}

/// Message for the last failure on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn bqt_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bqt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

fn boxed_state(out: *mut *mut BqtState, s: bqt_core::Result<BipartiteState>) -> Result<(), (BqtStatus, String)> {
    if out.is_null() {
        return Err(null());
    }
    let s = lift(s)?;
    // SAFETY: checked non-null above; the caller owns the slot.
    unsafe { out.write(Box::into_raw(Box::new(BqtState(s)))) };
    Ok(())
}

/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn bqt_state_isotropic(fidelity: c_double, dim: size_t, out: *mut *mut BqtState) -> BqtStatus {
    guard(|| boxed_state(out, IsotropicParams::new(fidelity, dim).map(isotropic_state)))
}

/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn bqt_state_gadc(gamma: c_double, noise: c_double, out: *mut *mut BqtState) -> BqtStatus {
    guard(|| boxed_state(out, GadcParams::new(gamma, noise).map(gadc_resource_state)))
}

/// Maximally entangled state on `d x d`.
///
/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn bqt_state_max_entangled(d: size_t, out: *mut *mut BqtState) -> BqtStatus {
    guard(|| boxed_state(out, max_entangled_state(d)))
}

/// Maximally mixed state on `d x d`.
///
/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn bqt_state_maximally_mixed(d: size_t, out: *mut *mut BqtState) -> BqtStatus {
    guard(|| {
        boxed_state(
            out,
            DensityMatrix::maximally_mixed(d * d).and_then(|m| BipartiteState::new(d, d, m)),
        )
    })
}

/// Parses the JSON state format (`rows`, `cols`, `re`, `im`, `dimA`, `dimB`).
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be valid for writing
/// one pointer.
#[no_mangle]
pub unsafe extern "C" fn bqt_state_from_json(json: *const c_char, out: *mut *mut BqtState) -> BqtStatus {
    guard(|| {
        if json.is_null() {
            return Err(null());
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|_| (BqtStatus::Json, "state JSON is not UTF-8".to_string()))?;
        boxed_state(out, parse_state(text))
    })
}

/// # Safety
/// `state` must be NULL or a live handle from this library; the
/// out-pointers must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn bqt_state_dims(state: *const BqtState, dim_a: *mut size_t, dim_b: *mut size_t) -> BqtStatus {
    guard(|| {
        let s = state.as_ref().ok_or_else(null)?;
        put(dim_a, s.0.dim_a())?;
        put(dim_b, s.0.dim_b())
    })
}

/// # Safety
/// `state` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bqt_state_free(state: *mut BqtState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Solves the PPT simulation-error program for the swap of dimension `d`.
///
/// # Safety
/// `state` must be a live handle; `out` must be valid for writing one
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn bqt_ppt_simulation_error(
    state: *const BqtState,
    d: size_t,
    out: *mut *mut BqtSolution,
) -> BqtStatus {
    guard(|| {
        let s = state.as_ref().ok_or_else(null)?;
        if out.is_null() {
            return Err(null());
        }
        let sol = lift(ppt_simulation_error(&s.0, d))?;
        out.write(Box::into_raw(Box::new(BqtSolution(sol))));
        Ok(())
    })
}

/// # Safety
/// `sol` must be a live handle; `value` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn bqt_solution_value(sol: *const BqtSolution, value: *mut c_double) -> BqtStatus {
    guard(|| put(value, sol.as_ref().ok_or_else(null)?.0.value))
}

/// Unclipped value, as compared against closed forms.
///
/// # Safety
/// `sol` must be a live handle; `value` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn bqt_solution_raw_value(sol: *const BqtSolution, value: *mut c_double) -> BqtStatus {
    guard(|| put(value, sol.as_ref().ok_or_else(null)?.0.raw_value))
}

/// # Safety
/// `sol` must be a live handle; `residual` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn bqt_solution_max_residual(sol: *const BqtSolution, residual: *mut c_double) -> BqtStatus {
    guard(|| put(residual, sol.as_ref().ok_or_else(null)?.0.max_residual))
}

/// # Safety
/// `sol` must be a live handle; `status` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn bqt_solution_status(sol: *const BqtSolution, status: *mut BqtSolveStatus) -> BqtStatus {
    guard(|| {
        let s = match sol.as_ref().ok_or_else(null)?.0.status {
            SolveStatus::Optimal => BqtSolveStatus::Optimal,
            SolveStatus::NearOptimal => BqtSolveStatus::NearOptimal,
            SolveStatus::Infeasible => BqtSolveStatus::Infeasible,
            SolveStatus::NumericalFailure => BqtSolveStatus::NumericalFailure,
        };
        put(status, s)
    })
}

/// Copies one POVM element, row-major, into `re` and `im`, each holding
/// `len` doubles. `len` must equal `n * n` for the `n x n` element; call with
/// NULL buffers to query `n` through `dim`.
///
/// # Safety
/// `sol` must be a live handle. `dim` must be valid for writing. Non-NULL
/// buffers must hold `len` doubles each.
#[no_mangle]
pub unsafe extern "C" fn bqt_solution_witness(
    sol: *const BqtSolution,
    which: BqtPovmElement,
    re: *mut c_double,
    im: *mut c_double,
    len: size_t,
    dim: *mut size_t,
) -> BqtStatus {
    guard(|| {
        let s = sol.as_ref().ok_or_else(null)?;
        let w = &s.0.witness;
        let m = match which {
            BqtPovmElement::K => &w.k,
            BqtPovmElement::L => &w.l,
            BqtPovmElement::N => &w.n,
        };
        put(dim, m.nrows())?;
        if re.is_null() && im.is_null() {
            return Ok(());
        }
        if re.is_null() || im.is_null() {
            return Err(null());
        }
        if len != m.len() {
            return Err((
                BqtStatus::DimensionMismatch,
                format!("buffer holds {len} entries, element has {}", m.len()),
            ));
        }
        for (i, z) in m.iter().enumerate() {
            re.add(i).write(z.re);
            im.add(i).write(z.im);
        }
        Ok(())
    })
}

/// # Safety
/// `sol` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bqt_solution_free(sol: *mut BqtSolution) {
    if !sol.is_null() {
        drop(Box::from_raw(sol));
    }
}

/// `1 - 1/d^2`.
///
/// # Safety
/// `value` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn bqt_no_resource_error(d: size_t, value: *mut c_double) -> BqtStatus {
    guard(|| put(value, lift(no_resource_error(d))?))
}

/// Closed-form error for an isotropic resource. `branch` and `locc_tight`
/// may be NULL.
///
/// # Safety
/// `value` must be valid for writing; the other out-pointers must be NULL
/// or valid.
#[no_mangle]
pub unsafe extern "C" fn bqt_isotropic_error(
    d: size_t,
    fidelity: c_double,
    dim_resource: size_t,
    value: *mut c_double,
    branch: *mut BqtBranch,
    locc_tight: *mut c_int,
) -> BqtStatus {
    guard(|| {
        let e = lift(isotropic_error(d, fidelity, dim_resource))?;
        put(value, e.value)?;
        if !branch.is_null() {
            branch.write(match e.branch {
                Branch::NoEntanglement => BqtBranch::NoEntanglement,
                Branch::MidDimension => BqtBranch::MidDimension,
                Branch::HighDimension => BqtBranch::HighDimension,
            });
        }
        if !locc_tight.is_null() {
            locc_tight.write(c_int::from(e.locc_tight));
        }
        Ok(())
    })
}

/// `1 - max{F(gamma, N), 1/16}`.
///
/// # Safety
/// `value` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn bqt_gadc_error(gamma: c_double, noise: c_double, value: *mut c_double) -> BqtStatus {
    guard(|| put(value, lift(gadc_error(gamma, noise))?))
}
