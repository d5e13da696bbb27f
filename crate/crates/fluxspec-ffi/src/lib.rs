//! C ABI for the fluxspec solvers.
//!
//! Conventions: domains are opaque handles created and freed here; every
//! fallible call returns an [`FsStatus`] and writes results through out
//! pointers only on `FS_STATUS_OK`. The failure message of the most recent
//! call on the current thread is available via [`fs_last_error`]. All entry
//! points catch panics and translate them to `FS_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use fluxspec::certificates;
use fluxspec::geometry::{
    make_eccentric_annulus, make_perturbed_disk, reduce_flux, AnnulusSpec, StarDomain,
};
use fluxspec::planar;
use fluxspec::radial;
use fluxspec::Error;

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FsStatus {
    Ok = 0,
    InvalidArgument = 1,
    GeometryInfeasible = 2,
    HoleTouchesBoundary = 3,
    MeshError = 4,
    AssemblyIntegrity = 5,
    ConvergenceFailure = 6,
    OracleFailure = 7,
    InvariantViolation = 8,
    IoError = 9,
    NullPointer = 10,
    Panic = 11,
}

/// Inner boundary condition of the perforated problems.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FsInnerBc {
    Dirichlet = 0,
    Neumann = 1,
}

/// Problem kind of the two-dimensional solves.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FsProblemKind {
    PerforatedDirichletInner = 0,
    PerforatedNeumannInner = 1,
    PuncturedFriedrichs = 2,
    LocalizedField = 3,
}

/// A flux value with its canonical fold into [0, 1/2].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct FsFlux {
    pub raw: f64,
    pub reduced: f64,
    pub mode_shift: i64,
    /// 1 when the fold used evenness.
    pub sign_flipped: u8,
}

/// Result of a two-dimensional eigenvalue solve.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct FsEigenResult {
    pub lambda: f64,
    /// Algebraic residual of the returned pair.
    pub residual: f64,
    /// Discretization error estimate from one refinement step.
    pub est_error: f64,
    pub iterations: usize,
}

/// Trial-state certificate of a domain against its matched annulus.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct FsCertificate {
    /// Rayleigh quotient of the radial trial state on the domain.
    pub rq: f64,
    /// Matched-annulus eigenvalue.
    pub lambda_annulus: f64,
    pub mass_gap: f64,
    pub energy_gap: f64,
    pub rq_error: f64,
    /// 1 when rq ≤ lambda_annulus within tolerance.
    pub upper_bound_ok: u8,
}

/// Opaque perforated-domain handle.
pub struct FsDomain(StarDomain);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let sanitized: String = msg.chars().filter(|&c| c != '\0').collect();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_of(err: &Error) -> FsStatus {
    match err {
        Error::InvalidArgument(_) => FsStatus::InvalidArgument,
        Error::GeometryInfeasible(_) => FsStatus::GeometryInfeasible,
        Error::HoleTouchesBoundary(_) => FsStatus::HoleTouchesBoundary,
        Error::Mesh(_) => FsStatus::MeshError,
        Error::AssemblyIntegrity(_) => FsStatus::AssemblyIntegrity,
        Error::Convergence { .. } => FsStatus::ConvergenceFailure,
        Error::OracleFailure(_) => FsStatus::OracleFailure,
        Error::InvariantViolation(_) => FsStatus::InvariantViolation,
        Error::Config(_) | Error::Json(_) => FsStatus::InvalidArgument,
        Error::Io(_) => FsStatus::IoError,
    }
}

fn run_guarded<F: FnOnce() -> Result<(), (FsStatus, String)>>(f: F) -> FsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FsStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            FsStatus::Panic
        }
    }
}

fn fail(err: Error) -> (FsStatus, String) {
    (status_of(&err), err.to_string())
}

fn null_ptr() -> (FsStatus, String) {
    (FsStatus::NullPointer, "null pointer argument".to_string())
}

/// Copy the most recent error message of this thread into `buf`
/// (NUL-terminated, truncated to `cap`). Returns the full message length in
/// bytes, excluding the terminator.
///
/// # Safety
/// `buf` must point to at least `cap` writable bytes, or be null (then only
/// the length is returned).
#[no_mangle]
pub unsafe extern "C" fn fs_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let msg = slot.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Fold a flux into the canonical interval [0, 1/2].
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fs_flux_reduce(phi: f64, out: *mut FsFlux) -> FsStatus {
    run_guarded(|| {
        if out.is_null() {
            return Err(null_ptr());
        }
        let flux = reduce_flux(phi).map_err(fail)?;
        *out = FsFlux {
            raw: flux.raw,
            reduced: flux.reduced,
            mode_shift: flux.mode_shift,
            sign_flipped: u8::from(flux.sign_flipped),
        };
        Ok(())
    })
}

/// Parse a domain from its JSON description.
///
/// # Safety
/// `json` must be a valid NUL-terminated string; `out` must be valid. The
/// returned handle must be released with [`fs_domain_free`].
#[no_mangle]
pub unsafe extern "C" fn fs_domain_from_json(
    json: *const c_char,
    out: *mut *mut FsDomain,
) -> FsStatus {
    run_guarded(|| {
        if json.is_null() || out.is_null() {
            return Err(null_ptr());
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|_| (FsStatus::InvalidArgument, "invalid UTF-8".to_string()))?;
        let dom: StarDomain =
            serde_json::from_str(text).map_err(|e| fail(Error::Json(e)))?;
        *out = Box::into_raw(Box::new(FsDomain(dom)));
        Ok(())
    })
}

/// Annulus whose outer circle is offset by `delta` from the hole center.
///
/// # Safety
/// `out` must be valid; release the handle with [`fs_domain_free`].
#[no_mangle]
pub unsafe extern "C" fn fs_domain_eccentric(
    r0: f64,
    r1: f64,
    delta: f64,
    out: *mut *mut FsDomain,
) -> FsStatus {
    run_guarded(|| {
        if out.is_null() {
            return Err(null_ptr());
        }
        let dom = make_eccentric_annulus(r0, r1, delta).map_err(fail)?;
        *out = Box::into_raw(Box::new(FsDomain(dom)));
        Ok(())
    })
}

/// Perturbed disk with cosine/sine coefficient arrays; with `renormalize`
/// nonzero the outer area is matched to `π r1²` exactly.
///
/// # Safety
/// `cos`/`sin` must point to `n_cos`/`n_sin` doubles (null allowed when the
/// count is 0); `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn fs_domain_perturbed_disk(
    r1: f64,
    r0: f64,
    cos: *const f64,
    n_cos: usize,
    sin: *const f64,
    n_sin: usize,
    renormalize: u8,
    out: *mut *mut FsDomain,
) -> FsStatus {
    run_guarded(|| {
        if out.is_null() || (cos.is_null() && n_cos > 0) || (sin.is_null() && n_sin > 0) {
            return Err(null_ptr());
        }
        let cos_s = if n_cos == 0 {
            &[][..]
        } else {
            std::slice::from_raw_parts(cos, n_cos)
        };
        let sin_s = if n_sin == 0 {
            &[][..]
        } else {
            std::slice::from_raw_parts(sin, n_sin)
        };
        let dom =
            make_perturbed_disk(r1, r0, cos_s, sin_s, renormalize != 0).map_err(fail)?;
        *out = Box::into_raw(Box::new(FsDomain(dom)));
        Ok(())
    })
}

/// Release a domain handle. Null is ignored.
///
/// # Safety
/// `dom` must be a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fs_domain_free(dom: *mut FsDomain) {
    if !dom.is_null() {
        drop(Box::from_raw(dom));
    }
}

/// Area enclosed by the outer boundary, exact from the representation.
///
/// # Safety
/// `dom` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn fs_domain_outer_area(
    dom: *const FsDomain,
    out: *mut f64,
) -> FsStatus {
    run_guarded(|| {
        if dom.is_null() || out.is_null() {
            return Err(null_ptr());
        }
        *out = (*dom).0.outer_area();
        Ok(())
    })
}

/// Radii of the area-matched concentric annulus.
///
/// # Safety
/// `dom` must be a live handle; `out_r0`, `out_r1` must be valid.
#[no_mangle]
pub unsafe extern "C" fn fs_domain_matched_annulus(
    dom: *const FsDomain,
    out_r0: *mut f64,
    out_r1: *mut f64,
) -> FsStatus {
    run_guarded(|| {
        if dom.is_null() || out_r0.is_null() || out_r1.is_null() {
            return Err(null_ptr());
        }
        let a = (*dom).0.matched_annulus().map_err(fail)?;
        *out_r0 = a.r0;
        *out_r1 = a.r1;
        Ok(())
    })
}

fn inner_bc_of(bc: FsInnerBc) -> radial::InnerBc {
    match bc {
        FsInnerBc::Dirichlet => radial::InnerBc::Dirichlet,
        FsInnerBc::Neumann => radial::InnerBc::Neumann,
    }
}

/// Lowest eigenvalue of the annulus over the angular-mode window.
///
/// # Safety
/// `out_lambda` must be valid; `out_est_error` and `out_mode` may be null.
#[no_mangle]
pub unsafe extern "C" fn fs_annulus_eigenvalue(
    r0: f64,
    r1: f64,
    phi: f64,
    bc: FsInnerBc,
    n_elements: usize,
    m_window: i64,
    out_lambda: *mut f64,
    out_est_error: *mut f64,
    out_mode: *mut i64,
) -> FsStatus {
    run_guarded(|| {
        if out_lambda.is_null() {
            return Err(null_ptr());
        }
        let annulus = AnnulusSpec::new(r0, r1).map_err(fail)?;
        let flux = reduce_flux(phi).map_err(fail)?;
        let res = radial::annulus_eigenvalue(
            &annulus,
            &flux,
            inner_bc_of(bc),
            n_elements,
            m_window,
        )
        .map_err(fail)?;
        *out_lambda = res.lambda;
        if !out_est_error.is_null() {
            *out_est_error = res.estimated_error;
        }
        if !out_mode.is_null() {
            *out_mode = res.minimizing_mode;
        }
        Ok(())
    })
}

/// Closed-form eigenvalue of the annulus at reduced flux 1/2.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn fs_halfflux_oracle(
    r0: f64,
    r1: f64,
    bc: FsInnerBc,
    out: *mut f64,
) -> FsStatus {
    run_guarded(|| {
        if out.is_null() {
            return Err(null_ptr());
        }
        let annulus = AnnulusSpec::new(r0, r1).map_err(fail)?;
        *out = radial::halfflux_oracle(&annulus, inner_bc_of(bc)).map_err(fail)?;
        Ok(())
    })
}

/// Bessel cross-product eigenvalue of the annulus at zero flux
/// (Dirichlet inner, Neumann outer).
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn fs_zero_flux_oracle(
    r0: f64,
    r1: f64,
    out: *mut f64,
) -> FsStatus {
    run_guarded(|| {
        if out.is_null() {
            return Err(null_ptr());
        }
        let annulus = AnnulusSpec::new(r0, r1).map_err(fail)?;
        *out = radial::zero_flux_oracle(&annulus).map_err(fail)?;
        Ok(())
    })
}

/// Shrinking-hole limit eigenvalue of the disk at reduced flux 1/2.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn fs_disk_halfflux_oracle(r1: f64, out: *mut f64) -> FsStatus {
    run_guarded(|| {
        if out.is_null() {
            return Err(null_ptr());
        }
        *out = radial::halfflux_disk_oracle(r1).map_err(fail)?;
        Ok(())
    })
}

/// Two-dimensional eigenvalue solve on a domain. `core_radius` is consumed
/// only by the punctured kind (pass 0 otherwise); the error estimate comes
/// from a half-resolution companion solve.
///
/// # Safety
/// `dom` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn fs_planar_eigenvalue(
    dom: *const FsDomain,
    phi: f64,
    kind: FsProblemKind,
    n_s: usize,
    n_t: usize,
    core_radius: f64,
    tol: f64,
    out: *mut FsEigenResult,
) -> FsStatus {
    run_guarded(|| {
        if dom.is_null() || out.is_null() {
            return Err(null_ptr());
        }
        let domain = &(*dom).0;
        let res = match kind {
            FsProblemKind::LocalizedField => {
                planar::solve_localized_with_error(domain, phi, n_s, n_t, tol)
            }
            _ => {
                let planar_kind = match kind {
                    FsProblemKind::PerforatedNeumannInner => {
                        planar::ProblemKind::PerforatedNeumannInner
                    }
                    FsProblemKind::PuncturedFriedrichs => {
                        planar::ProblemKind::PuncturedFriedrichs
                    }
                    _ => planar::ProblemKind::PerforatedDirichletInner,
                };
                let flux = reduce_flux(phi).map_err(fail)?;
                let core = if core_radius > 0.0 {
                    Some(core_radius)
                } else {
                    None
                };
                planar::solve_ab_with_error(
                    domain,
                    &flux,
                    planar_kind,
                    n_s,
                    n_t,
                    core,
                    tol,
                )
            }
        }
        .map_err(fail)?;
        *out = FsEigenResult {
            lambda: res.lambda,
            residual: res.residual,
            est_error: res.estimated_error,
            iterations: res.iterations,
        };
        Ok(())
    })
}

/// Trial-state certificate of a domain against its matched annulus.
///
/// # Safety
/// `dom` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn fs_certificate(
    dom: *const FsDomain,
    phi: f64,
    bc: FsInnerBc,
    profile_elements: usize,
    quad_n: usize,
    out: *mut FsCertificate,
) -> FsStatus {
    run_guarded(|| {
        if dom.is_null() || out.is_null() {
            return Err(null_ptr());
        }
        let domain = &(*dom).0;
        let flux = reduce_flux(phi).map_err(fail)?;
        let trial = certificates::build_trial_state(
            domain,
            &flux,
            inner_bc_of(bc),
            profile_elements,
        )
        .map_err(fail)?;
        let report =
            certificates::rayleigh_quotient(&trial, domain, quad_n).map_err(fail)?;
        *out = FsCertificate {
            rq: report.rq_value,
            lambda_annulus: report.lambda_annulus,
            mass_gap: report.mass_gap,
            energy_gap: report.energy_gap,
            rq_error: report.rq_error,
            upper_bound_ok: u8::from(report.upper_bound_ok),
        };
        Ok(())
    })
}
