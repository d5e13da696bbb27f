//! Two-dimensional solves on star-shaped domains in mapped polar
//! coordinates.

mod assemble;
mod eigen;
mod mesh;
mod precond;
pub mod sparse;

pub use assemble::{assemble_ab_form, assemble_localized_form, HermitianFormPair};
pub use eigen::{
    smallest_eigenpair, EigenSolveResult, DEFAULT_EIG_TOL, DEFAULT_MAX_ITERS,
};
pub use mesh::{DofMap, PolarMesh, ProblemKind, CORE_GRADING};

use crate::error::{Error, Result};
use crate::geometry::{Flux, StarDomain};

/// Default mesh resolution for production solves.
pub const DEFAULT_N_S: usize = 96;
/// Default angular resolution for production solves.
pub const DEFAULT_N_T: usize = 192;

/// One flux-line solve at fixed resolution. `core_radius` is only
/// meaningful for [`ProblemKind::PuncturedFriedrichs`].
pub fn solve_ab(
    dom: &StarDomain,
    flux: &Flux,
    kind: ProblemKind,
    n_s: usize,
    n_t: usize,
    core_radius: Option<f64>,
    tol: f64,
) -> Result<EigenSolveResult> {
    let mesh = PolarMesh::for_kind(dom, kind, n_s, n_t, core_radius)?;
    let forms = assemble_ab_form(dom, flux, kind, &mesh)?;
    smallest_eigenpair(&forms, &mesh, tol, DEFAULT_MAX_ITERS)
}

/// One localized-field solve at fixed resolution.
pub fn solve_localized(
    dom: &StarDomain,
    phi: f64,
    n_s: usize,
    n_t: usize,
    tol: f64,
) -> Result<EigenSolveResult> {
    let mesh = PolarMesh::for_kind(dom, ProblemKind::LocalizedField, n_s, n_t, None)?;
    let forms = assemble_localized_form(dom, phi, &mesh)?;
    smallest_eigenpair(&forms, &mesh, tol, DEFAULT_MAX_ITERS)
}

fn coarse_resolution(n_s: usize, n_t: usize) -> (usize, usize) {
    let cs = (n_s / 2).max(8);
    let mut ct = (n_t / 2).max(16);
    if ct % 2 == 1 {
        ct += 1;
    }
    (cs, ct)
}

/// Safety factor on the one-step Richardson estimate. The raw estimate
/// equals the leading error term exactly when the order-2 expansion is
/// clean, which leaves no room for the higher-order remainder; the factor
/// turns the estimate into a usable bound (grid-convergence practice uses
/// 1.25–3).
const RICHARDSON_SAFETY: f64 = 2.0;

fn with_refinement_estimate(
    fine: EigenSolveResult,
    coarse_lambda: f64,
) -> EigenSolveResult {
    let est = RICHARDSON_SAFETY * ((fine.lambda - coarse_lambda) / 3.0).abs();
    let floor = fine.residual.max(1e-14 * fine.lambda.abs());
    EigenSolveResult {
        estimated_error: est.max(floor),
        ..fine
    }
}

/// Flux-line solve with a half-resolution companion solve folded into
/// `estimated_error`.
pub fn solve_ab_with_error(
    dom: &StarDomain,
    flux: &Flux,
    kind: ProblemKind,
    n_s: usize,
    n_t: usize,
    core_radius: Option<f64>,
    tol: f64,
) -> Result<EigenSolveResult> {
    let fine = solve_ab(dom, flux, kind, n_s, n_t, core_radius, tol)?;
    let (cs, ct) = coarse_resolution(n_s, n_t);
    let coarse = solve_ab(dom, flux, kind, cs, ct, core_radius, tol)?;
    Ok(with_refinement_estimate(fine, coarse.lambda))
}

/// Localized-field solve with a half-resolution error estimate.
pub fn solve_localized_with_error(
    dom: &StarDomain,
    phi: f64,
    n_s: usize,
    n_t: usize,
    tol: f64,
) -> Result<EigenSolveResult> {
    let fine = solve_localized(dom, phi, n_s, n_t, tol)?;
    let (cs, ct) = coarse_resolution(n_s, n_t);
    let coarse = solve_localized(dom, phi, cs, ct, tol)?;
    Ok(with_refinement_estimate(fine, coarse.lambda))
}

/// One row of a shrinking-core ladder.
#[derive(Debug, Clone, Copy)]
pub struct PuncturedRow {
    pub core_radius: f64,
    pub lambda: f64,
    pub estimated_error: f64,
    pub residual: f64,
}

/// Shrinking-core table with a best-effort extrapolation.
#[derive(Debug, Clone)]
pub struct PuncturedResult {
    pub table: Vec<PuncturedRow>,
    /// Power-law extrapolated limit; absent when the ladder is not monotone
    /// beyond tolerance.
    pub extrapolated: Option<f64>,
    /// Conservative uncertainty of the extrapolated value.
    pub uncertainty: f64,
    pub monotone: bool,
}

/// Eigenvalue of the punctured problem: Dirichlet cores of the given radii
/// (strictly decreasing), solved on core-graded meshes, with the limit
/// estimated from the tail of the ladder.
///
/// The ε → 0 rate is problem dependent (power-like at half flux,
/// logarithmic near integer flux), so the table is the primary artifact and
/// the extrapolation carries a reported uncertainty.
pub fn punctured_eigenvalue(
    dom: &StarDomain,
    flux: &Flux,
    core_radii: &[f64],
    n_s: usize,
    n_t: usize,
    tol: f64,
) -> Result<PuncturedResult> {
    if core_radii.is_empty() {
        return Err(Error::InvalidArgument("no core radii given".into()));
    }
    let min_r = dom.min_outer_radius();
    for w in core_radii.windows(2) {
        if w[1] >= w[0] {
            return Err(Error::InvalidArgument(
                "core radii must be strictly decreasing".into(),
            ));
        }
    }
    if core_radii[0] >= 0.25 * min_r {
        return Err(Error::InvalidArgument(format!(
            "largest core {} is not small next to the domain (min outer radius {min_r})",
            core_radii[0]
        )));
    }

    let mut table = Vec::with_capacity(core_radii.len());
    for &eps in core_radii {
        let res = solve_ab_with_error(
            dom,
            flux,
            ProblemKind::PuncturedFriedrichs,
            n_s,
            n_t,
            Some(eps),
            tol,
        )?;
        table.push(PuncturedRow {
            core_radius: eps,
            lambda: res.lambda,
            estimated_error: res.estimated_error,
            residual: res.residual,
        });
    }

    // Shrinking the core enlarges the trial space, so λ(ε) must not
    // increase beyond discretization noise.
    let mut monotone = true;
    for w in table.windows(2) {
        let tol_mono = 10.0 * (w[0].estimated_error + w[1].estimated_error) + 1e-12;
        if w[1].lambda > w[0].lambda + tol_mono {
            monotone = false;
        }
    }

    let (extrapolated, uncertainty) = if monotone {
        extrapolate_tail(&table)
    } else {
        (None, f64::NAN)
    };

    Ok(PuncturedResult {
        table,
        extrapolated,
        uncertainty,
        monotone,
    })
}

/// Fit λ(ε) = λ* + C ε^p through the last three rows of a geometric ladder;
/// fall back to the last value with a difference-sized uncertainty when the
/// fit is not usable.
fn extrapolate_tail(table: &[PuncturedRow]) -> (Option<f64>, f64) {
    let n = table.len();
    let last = table[n - 1];
    if n < 3 {
        let unc = if n == 2 {
            (table[0].lambda - table[1].lambda).abs()
        } else {
            f64::NAN
        };
        return (Some(last.lambda), unc + last.estimated_error);
    }
    let (a, b, c) = (table[n - 3], table[n - 2], table[n - 1]);
    let r1 = a.core_radius / b.core_radius;
    let r2 = b.core_radius / c.core_radius;
    let d1 = a.lambda - b.lambda;
    let d2 = b.lambda - c.lambda;
    let geometric = (r1 / r2 - 1.0).abs() < 0.05;
    if geometric && d1 > 0.0 && d2 > 0.0 {
        let p = (d1 / d2).ln() / r1.ln();
        if p.is_finite() && p > 0.05 {
            let denom = r1.powf(p) - 1.0;
            let limit = c.lambda - d2 / denom;
            let unc = (limit - c.lambda).abs() + c.estimated_error;
            return (Some(limit), unc);
        }
    }
    (Some(c.lambda), d2.abs() + c.estimated_error)
}

/// Write the eigenvector as plain CSV rows `s,theta,re_u,im_u`, nodes in
/// dof order, eliminated Dirichlet ring omitted.
pub fn dump_eigenvector_csv<W: std::io::Write>(
    res: &EigenSolveResult,
    forms_dof_map: &DofMap,
    out: &mut W,
) -> Result<()> {
    writeln!(out, "s,theta,re_u,im_u")?;
    let dth = res.mesh.delta_theta();
    for (dof, v) in res.eigenvector.iter().enumerate() {
        let (i, j) = forms_dof_map.node(dof);
        writeln!(
            out,
            "{:.12e},{:.12e},{:.12e},{:.12e}",
            res.mesh.s_nodes[i],
            j as f64 * dth,
            v.re,
            v.im
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_eccentric_annulus, reduce_flux};
    use crate::radial::{self, InnerBc};

    const TOL: f64 = 1e-10;

    #[test]
    fn concentric_halfflux_matches_radial_oracle() {
        let dom = make_eccentric_annulus(1.0, 2.0, 0.0).unwrap();
        let flux = reduce_flux(0.5).unwrap();
        let res = solve_ab(
            &dom,
            &flux,
            ProblemKind::PerforatedDirichletInner,
            48,
            96,
            None,
            TOL,
        )
        .unwrap();
        let oracle = radial::halfflux_oracle(
            &crate::geometry::AnnulusSpec::new(1.0, 2.0).unwrap(),
            InnerBc::Dirichlet,
        )
        .unwrap();
        let rel = (res.lambda - oracle).abs() / oracle;
        assert!(rel < 5e-4, "lambda={} oracle={oracle} rel={rel}", res.lambda);
        assert!(res.residual <= TOL);
    }

    #[test]
    fn neumann_zero_flux_gives_zero() {
        let dom = make_eccentric_annulus(1.0, 2.0, 0.3).unwrap();
        let flux = reduce_flux(0.0).unwrap();
        let res = solve_ab(
            &dom,
            &flux,
            ProblemKind::PerforatedNeumannInner,
            16,
            32,
            None,
            TOL,
        )
        .unwrap();
        assert!(res.lambda.abs() < 1e-9, "lambda={}", res.lambda);
    }

    #[test]
    fn integer_flux_matches_zero_flux_dirichlet() {
        // Periodicity at the solver level: raw flux 1 equals raw flux 0.
        // Discretely the winding-one gauge factor is not representable, so
        // agreement holds to the refinement error estimate, not exactly.
        let dom = make_eccentric_annulus(1.0, 2.0, 0.0).unwrap();
        let f0 = reduce_flux(0.0).unwrap();
        let f1 = reduce_flux(1.0).unwrap();
        let kind = ProblemKind::PerforatedDirichletInner;
        let a = solve_ab_with_error(&dom, &f0, kind, 32, 48, None, TOL).unwrap();
        let b = solve_ab_with_error(&dom, &f1, kind, 32, 48, None, TOL).unwrap();
        let tol = 2.0 * (TOL + a.estimated_error + b.estimated_error);
        assert!(
            (a.lambda - b.lambda).abs() <= tol,
            "{} vs {} (tol {tol:.3e})",
            a.lambda,
            b.lambda
        );
    }

    #[test]
    fn localized_zero_flux_is_free() {
        let dom = make_eccentric_annulus(0.5, 1.0, 0.0).unwrap();
        let res = solve_localized(&dom, 0.0, 16, 32, TOL).unwrap();
        assert!(res.lambda.abs() < 1e-9);
    }

    #[test]
    fn localized_disk_matches_radial_reduction() {
        let dom = make_eccentric_annulus(0.5, 1.0, 0.0).unwrap();
        let res = solve_localized(&dom, 1.0, 48, 64, TOL).unwrap();
        let reference = radial::localized_disk_eigenvalue(1.0, 0.5, 1.0, 4096).unwrap();
        let rel = (res.lambda - reference.lambda).abs() / reference.lambda;
        assert!(
            rel < 2e-3,
            "2d={} 1d={} rel={rel}",
            res.lambda,
            reference.lambda
        );
        assert!(res.lambda > 0.5, "not gauge-trivial at integer flux");
    }

    #[test]
    fn bc_monotonicity_neumann_below_dirichlet() {
        let dom = make_eccentric_annulus(1.0, 2.0, 0.3).unwrap();
        let flux = reduce_flux(0.25).unwrap();
        let d = solve_ab(
            &dom,
            &flux,
            ProblemKind::PerforatedDirichletInner,
            32,
            64,
            None,
            TOL,
        )
        .unwrap();
        let n = solve_ab(
            &dom,
            &flux,
            ProblemKind::PerforatedNeumannInner,
            32,
            64,
            None,
            TOL,
        )
        .unwrap();
        assert!(n.lambda <= d.lambda);
    }

    #[test]
    fn punctured_ladder_validation() {
        let dom = make_eccentric_annulus(0.1, 1.0, 0.0).unwrap();
        let flux = reduce_flux(0.5).unwrap();
        // not strictly decreasing
        assert!(
            punctured_eigenvalue(&dom, &flux, &[0.01, 0.02], 16, 16, TOL).is_err()
        );
        // core too large
        assert!(punctured_eigenvalue(&dom, &flux, &[0.5], 16, 16, TOL).is_err());
    }

    #[test]
    fn rotation_invariance_on_grid_multiples() {
        let dom = crate::geometry::make_perturbed_disk(2.0, 1.0, &[0.2], &[], true)
            .unwrap();
        let n_t = 32;
        let shift = 2.0 * std::f64::consts::PI * 3.0 / n_t as f64;
        let rot = dom.rotated(shift).unwrap();
        let flux = reduce_flux(0.3).unwrap();
        let kind = ProblemKind::PerforatedDirichletInner;
        let a = solve_ab(&dom, &flux, kind, 24, n_t, None, TOL).unwrap();
        let b = solve_ab(&rot, &flux, kind, 24, n_t, None, TOL).unwrap();
        assert!(
            (a.lambda - b.lambda).abs() < 1e-10 * a.lambda.max(1.0),
            "{} vs {}",
            a.lambda,
            b.lambda
        );
    }
}
