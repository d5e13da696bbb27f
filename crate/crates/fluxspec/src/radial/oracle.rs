//! Closed-form eigenvalue oracles for the annulus mode problems.
//!
//! At reduced flux 1/2 the radial equation collapses to trigonometric form
//! through the substitution u = w/√r, giving transcendental root equations
//! that are solved here by bracketed bisection, entirely independent of the
//! finite element path. At zero flux the same independence comes from the
//! integer-order Bessel cross product evaluated by ascending series.

use super::bessel;
use super::InnerBc;
use crate::error::{Error, Result};
use crate::geometry::AnnulusSpec;

const BISECT_REL_TOL: f64 = 1e-13;
const BISECT_MAX_ITERS: usize = 200;

/// Bracketed bisection on `f` over `[lo, hi]`; requires a sign change.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::OracleFailure(format!(
            "no sign change on bracket [{lo}, {hi}]"
        )));
    }
    for _ in 0..BISECT_MAX_ITERS {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 || (hi - lo) <= BISECT_REL_TOL * mid.abs() {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Scan `f` from `start` in steps of `step` until the sign changes, then
/// bisect. Fails if no change occurs before `max_x`.
fn scan_and_bisect(
    f: impl Fn(f64) -> f64,
    start: f64,
    step: f64,
    max_x: f64,
) -> Result<f64> {
    let mut lo = start;
    let mut flo = f(lo);
    while lo < max_x {
        let hi = lo + step;
        let fhi = f(hi);
        if flo == 0.0 {
            return Ok(lo);
        }
        if flo.signum() != fhi.signum() {
            return bisect(&f, lo, hi);
        }
        lo = hi;
        flo = fhi;
    }
    Err(Error::OracleFailure(format!(
        "no sign change in scan window [{start}, {max_x}]"
    )))
}

/// Lowest eigenvalue of the reduced-flux-1/2 mode problem on an annulus.
///
/// Dirichlet inner: `λ = k²` with k the smallest positive root of
/// `tan(k(r1−r0)) = 2 k r1`.
/// Neumann inner: k the smallest positive root of
/// `k(r1−r0) = arctan(2 k r1) − arctan(2 k r0)`.
pub fn halfflux_oracle(a: &AnnulusSpec, inner_bc: InnerBc) -> Result<f64> {
    let d = a.width();
    let k = match inner_bc {
        InnerBc::Dirichlet => {
            // sin(kd) − 2 k r1 cos(kd): negative near 0, +1 at kd = π/2.
            let f = |k: f64| (k * d).sin() - 2.0 * k * a.r1 * (k * d).cos();
            bisect(f, 1e-9 / d, std::f64::consts::FRAC_PI_2 / d)?
        }
        InnerBc::Neumann => {
            let f = |k: f64| {
                k * d - (2.0 * k * a.r1).atan() + (2.0 * k * a.r0).atan()
            };
            // f < 0 for small k (slope d − 2(r1−r0) < 0), f → +∞.
            let step = 0.01 / d;
            scan_and_bisect(f, 1e-9 / d, step, 100.0 / d)?
        }
    };
    Ok(k * k)
}

/// Limit eigenvalue of the shrinking-hole problem on a disk of radius `r1`
/// at reduced flux 1/2: `λ = k²` with `tan(k r1) = 2 k r1`.
///
/// This is the Dirichlet-inner closed form continued to a vanishing inner
/// radius; the regular endpoint selects the same root equation.
pub fn halfflux_disk_oracle(r1: f64) -> Result<f64> {
    if !(r1 > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "disk radius must be positive, got {r1}"
        )));
    }
    let f = |k: f64| (k * r1).sin() - 2.0 * k * r1 * (k * r1).cos();
    let k = bisect(f, 1e-9 / r1, std::f64::consts::FRAC_PI_2 / r1)?;
    Ok(k * k)
}

/// Lowest eigenvalue of the zero-flux m = 0 mode problem (Dirichlet at r0,
/// Neumann at r1): `λ = k²` with k the smallest positive root of the Bessel
/// cross product `J₀(k r0) Y₀′(k r1) − Y₀(k r0) J₀′(k r1)`.
pub fn zero_flux_oracle(a: &AnnulusSpec) -> Result<f64> {
    // X₀′ = −X₁, so the root equation is J₀(k r0) Y₁(k r1) = Y₀(k r0) J₁(k r1).
    let f = |k: f64| -> f64 {
        let j0a = bessel::j0(k * a.r0);
        let y1b = bessel::y1(k * a.r1).unwrap_or(f64::NAN);
        let y0a = bessel::y0(k * a.r0).unwrap_or(f64::NAN);
        let j1b = bessel::j1(k * a.r1);
        j0a * y1b - y0a * j1b
    };
    let d = a.width();
    // First root sits near π/(2d); scan well past it but stay inside the
    // series validity window.
    let step = std::f64::consts::FRAC_PI_2 / d / 64.0;
    let max_k = (bessel::MAX_ARG / a.r1).min(20.0 * std::f64::consts::FRAC_PI_2 / d);
    let k = scan_and_bisect(f, step * 1e-3, step, max_k)?;
    if !k.is_finite() {
        return Err(Error::OracleFailure("cross-product scan produced NaN".into()));
    }
    Ok(k * k)
}
