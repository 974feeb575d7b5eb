//! C ABI over `cvsep`.
//!
//! Every entry point returns a [`CvsepStatus`]; results go through out
//! pointers. Objects are opaque handles released with their `_free`
//! function. The message for the most recent failure on the calling thread
//! is available from [`cvsep_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use cvsep::fock::{alternate_maximize, fock_elements, FockOperator};
use cvsep::nongaussian::{photon_added_criterion, NGPASGSpec};
use cvsep::symplectic::{ppt_min_symplectic, standard_form, ModePartition};
use cvsep::witness::{minimize_L, SixParamDetect};
use cvsep::{criteria, CovarianceMatrix, Error};
use nalgebra::DMatrix;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CvsepStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NotPhysical = 3,
    Singular = 4,
    NoConvergence = 5,
    Unsupported = 6,
    Internal = 7,
}

impl From<&Error> for CvsepStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::NotPhysical(_) | Error::NotSymmetric(_) | Error::NotPositive(_) | Error::ImpureLocalCM(_) => {
                CvsepStatus::NotPhysical
            }
            Error::SingularSum(_) | Error::DegenerateBlock | Error::SingularGamma2 | Error::SingularMatrix => {
                CvsepStatus::Singular
            }
            Error::NoConvergence { .. } | Error::OptimFailure(_) | Error::StationarityViolated(..) => {
                CvsepStatus::NoConvergence
            }
            Error::UnsupportedOrder(_) | Error::UnclassifiedKernel | Error::GridTooNarrow(_) => {
                CvsepStatus::Unsupported
            }
            Error::OddDimension(_)
            | Error::NotSquare { .. }
            | Error::ModeMismatch(..)
            | Error::InvalidPartition(_)
            | Error::NegativeC(_)
            | Error::InvalidArgument(_) => CvsepStatus::InvalidArgument,
        }
    }
}

/// Validated covariance matrix.
pub struct CvsepCovariance(CovarianceMatrix);

/// Fock-basis detect operator elements.
pub struct CvsepFockOperator(FockOperator);

/// Outcome of an alternating maximization run.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct CvsepAlternation {
    pub m0: f64,
    pub rounds: usize,
    pub converged: bool,
}

/// A separability verdict. `entangled` is true when `margin` is below the
/// classification tolerance.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct CvsepVerdict {
    pub margin: f64,
    pub entangled: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), (CvsepStatus, String)>) -> CvsepStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            CvsepStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            CvsepStatus::Internal
        }
    }
}

fn lib_err(e: Error) -> (CvsepStatus, String) {
    ((&e).into(), e.to_string())
}

fn null(name: &str) -> (CvsepStatus, String) {
    (CvsepStatus::NullPointer, format!("{name} is null"))
}

unsafe fn deref<'a, T>(p: *const T, name: &str) -> Result<&'a T, (CvsepStatus, String)> {
    p.as_ref().ok_or_else(|| null(name))
}

unsafe fn write<T>(p: *mut T, v: T, name: &str) -> Result<(), (CvsepStatus, String)> {
    if p.is_null() {
        return Err(null(name));
    }
    p.write(v);
    Ok(())
}

fn verdict(v: criteria::Verdict) -> CvsepVerdict {
    CvsepVerdict { margin: v.margin, entangled: v.is_entangled() }
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn cvsep_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Builds a covariance matrix from `dim * dim` row-major entries.
///
/// # Safety
/// `data` must point to `dim * dim` readable doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cvsep_cm_new(data: *const f64, dim: usize, out: *mut *mut CvsepCovariance) -> CvsepStatus {
    guard(|| {
        if data.is_null() {
            return Err(null("data"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let n = dim.checked_mul(dim).ok_or((CvsepStatus::InvalidArgument, "dimension overflows".into()))?;
        let entries = std::slice::from_raw_parts(data, n);
        let cm = CovarianceMatrix::new(DMatrix::from_row_slice(dim, dim, entries)).map_err(lib_err)?;
        out.write(Box::into_raw(Box::new(CvsepCovariance(cm))));
        Ok(())
    })
}

/// # Safety
/// `cm` must be null or a handle from [`cvsep_cm_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cvsep_cm_free(cm: *mut CvsepCovariance) {
    if !cm.is_null() {
        drop(Box::from_raw(cm));
    }
}

/// # Safety
/// `cm` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cvsep_cm_modes(cm: *const CvsepCovariance, out: *mut usize) -> CvsepStatus {
    guard(|| write(out, deref(cm, "cm")?.0.modes(), "out"))
}

/// Smallest symplectic eigenvalue of the partial transpose with the first
/// `modes_a` modes on one side. Values below 1 signal entanglement.
///
/// # Safety
/// `cm` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cvsep_ppt_min_symplectic(
    cm: *const CvsepCovariance,
    modes_a: usize,
    out: *mut f64,
) -> CvsepStatus {
    guard(|| {
        let g = &deref(cm, "cm")?.0;
        let part = ModePartition::split(modes_a, g.modes()).map_err(lib_err)?;
        write(out, ppt_min_symplectic(g, &part).map_err(lib_err)?, "out")
    })
}

/// Simon criterion for a two-mode state.
///
/// # Safety
/// `cm` must be a live two-mode handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cvsep_simon(cm: *const CvsepCovariance, out: *mut CvsepVerdict) -> CvsepStatus {
    guard(|| {
        let sf = standard_form(&deref(cm, "cm")?.0).map_err(lib_err)?;
        write(out, verdict(criteria::simon_criterion(&sf)), "out")
    })
}

/// Closed-form criterion for squeezed thermal states with local variances
/// `a`, `b` and correlation `c`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cvsep_squeezed_thermal(a: f64, b: f64, c: f64, out: *mut CvsepVerdict) -> CvsepStatus {
    guard(|| write(out, verdict(criteria::squeezed_thermal(a, b, c)), "out"))
}

/// Minimum witness ratio over Gaussian detect operators; below 1 means
/// entangled.
///
/// # Safety
/// `cm` must be a live two-mode handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cvsep_witness_ratio(cm: *const CvsepCovariance, out: *mut f64) -> CvsepStatus {
    guard(|| write(out, minimize_L(&deref(cm, "cm")?.0).map_err(lib_err)?.value, "out"))
}

/// Separability verdict for a photon-added and -subtracted two-mode
/// Gaussian state. `adds` and `subs` hold one count per mode.
///
/// # Safety
/// `kernel` must be a live two-mode handle, `adds` and `subs` must point to
/// two readable values each and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cvsep_photon_added(
    kernel: *const CvsepCovariance,
    adds: *const u32,
    subs: *const u32,
    out: *mut CvsepVerdict,
) -> CvsepStatus {
    guard(|| {
        let g = deref(kernel, "kernel")?.0.clone();
        if adds.is_null() || subs.is_null() {
            return Err(null("counts"));
        }
        let counts = |p: *const u32| std::slice::from_raw_parts(p, 2).iter().map(|&k| k as usize).collect::<Vec<_>>();
        let spec = NGPASGSpec::new(g, counts(adds), counts(subs)).map_err(lib_err)?;
        write(out, verdict(photon_added_criterion(&spec).map_err(lib_err)?), "out")
    })
}

/// Fock-basis elements of the detect operator with six parameters
/// `(m1..m6)`, truncated at `cutoff` levels per mode.
///
/// # Safety
/// `detect` must point to six readable doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cvsep_fock_new(
    detect: *const f64,
    cutoff: usize,
    out: *mut *mut CvsepFockOperator,
) -> CvsepStatus {
    guard(|| {
        if detect.is_null() {
            return Err(null("detect"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let m = std::slice::from_raw_parts(detect, 6);
        let d = SixParamDetect::new(m[0], m[1], m[2], m[3], m[4], m[5]);
        let op = fock_elements(&d, cutoff).map_err(lib_err)?;
        out.write(Box::into_raw(Box::new(CvsepFockOperator(op))));
        Ok(())
    })
}

/// # Safety
/// `op` must be null or a handle from [`cvsep_fock_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cvsep_fock_free(op: *mut CvsepFockOperator) {
    if !op.is_null() {
        drop(Box::from_raw(op));
    }
}

/// Alternating maximization of the product-state expectation, started from
/// a random state drawn with `seed`.
///
/// # Safety
/// `op` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cvsep_fock_alternate_maximize(
    op: *const CvsepFockOperator,
    seed: u64,
    max_rounds: usize,
    out: *mut CvsepAlternation,
) -> CvsepStatus {
    guard(|| {
        let r = alternate_maximize(&deref(op, "op")?.0, seed, max_rounds);
        write(out, CvsepAlternation { m0: r.m0, rounds: r.rounds, converged: r.converged }, "out")
    })
}
