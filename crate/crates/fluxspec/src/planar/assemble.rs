//! Bilinear finite element assembly of the magnetic quadratic forms on the
//! mapped polar rectangle.
//!
//! The physical form is `∫∫ (|∂_r u|² + r⁻²|∂_θ u − iβ(r) u|²) r dr dθ`.
//! Pulling back through `r = r_in + s·J(θ)`, `J(θ) = R(θ) − r_in`, the
//! θ-derivative at fixed r picks up a cross term:
//!
//! `u_r = u_s / J`, `u_θ|_r = u_θ|_s − (s R′(θ)/J) u_s`,
//!
//! so with `a = u_s`, `B = u_θ|_s − iβu`, `c = s R′/J` the integrand is
//!
//! `|a|²(1/J² + c²/r²) + |B|²/r² − (c/r²)(a B̄ + ā B)`, weighted by `r J`.
//!
//! Elements are bilinear on the `(s,θ)` rectangle with 2×2 Gauss quadrature
//! per cell and exact periodic wrap in θ. Local matrices are mirrored from
//! the upper triangle, so the assembled stiffness is Hermitian to the last
//! bit, not merely to rounding.

use num_complex::Complex64;

use super::mesh::{DofMap, PolarMesh, ProblemKind};
use super::sparse::Csr;
use crate::error::{Error, Result};
use crate::geometry::{Flux, StarDomain};

/// Assembled stiffness/mass pair with the dof numbering that produced it.
#[derive(Debug, Clone)]
pub struct HermitianFormPair {
    pub stiffness: Csr<Complex64>,
    pub mass: Csr<f64>,
    pub dof_map: DofMap,
}

const GAUSS_2: [f64; 2] = [
    0.211324865405187118, // (1 − 1/√3)/2
    0.788675134594812882,
];

fn assemble_core(
    mesh: &PolarMesh,
    beta: impl Fn(f64) -> f64,
    dirichlet_inner: bool,
) -> Result<HermitianFormPair> {
    let dof_map = DofMap {
        n_s: mesh.n_s,
        n_t: mesh.n_t,
        dirichlet_inner,
    };
    let n_dofs = dof_map.n_dofs();
    let dth = mesh.delta_theta();

    let mut k_triplets: Vec<(usize, usize, Complex64)> =
        Vec::with_capacity(16 * mesh.n_s * mesh.n_t);
    let mut m_triplets: Vec<(usize, usize, f64)> =
        Vec::with_capacity(16 * mesh.n_s * mesh.n_t);

    for ci in 0..mesh.n_s {
        let s_lo = mesh.s_nodes[ci];
        let ds = mesh.s_nodes[ci + 1] - s_lo;
        for cj in 0..mesh.n_t {
            // Local node order: (ci,cj), (ci+1,cj), (ci,cj+1), (ci+1,cj+1).
            let dofs = [
                dof_map.dof(ci, cj),
                dof_map.dof(ci + 1, cj),
                dof_map.dof(ci, cj + 1),
                dof_map.dof(ci + 1, cj + 1),
            ];
            let mut ke = [[Complex64::new(0.0, 0.0); 4]; 4];
            let mut me = [[0.0f64; 4]; 4];

            for &xi in &GAUSS_2 {
                for &eta in &GAUSS_2 {
                    let shape = [
                        (1.0 - xi) * (1.0 - eta),
                        xi * (1.0 - eta),
                        (1.0 - xi) * eta,
                        xi * eta,
                    ];
                    let d_s = [
                        -(1.0 - eta) / ds,
                        (1.0 - eta) / ds,
                        -eta / ds,
                        eta / ds,
                    ];
                    let d_t = [
                        -(1.0 - xi) / dth,
                        -xi / dth,
                        (1.0 - xi) / dth,
                        xi / dth,
                    ];

                    let s = s_lo + xi * ds;
                    let theta = (cj as f64 + eta) * dth;
                    let big_r = mesh.domain.radius(theta);
                    let big_r_prime = mesh.domain.radius_deriv(theta);
                    let jac = big_r - mesh.r_in;
                    if !(jac > 0.0) {
                        return Err(Error::Mesh(format!(
                            "nonpositive mapping Jacobian {jac} at θ={theta}"
                        )));
                    }
                    let r = mesh.r_in + s * jac;
                    let cross = s * big_r_prime / jac;
                    let b = beta(r);
                    let alpha = 1.0 / (jac * jac) + cross * cross / (r * r);
                    let w = 0.25 * ds * dth * r * jac;
                    let inv_r2 = 1.0 / (r * r);

                    let bvec: [Complex64; 4] = std::array::from_fn(|p| {
                        Complex64::new(d_t[p], -b * shape[p])
                    });

                    for p in 0..4 {
                        for q in p..4 {
                            let v = alpha * d_s[p] * d_s[q]
                                + (bvec[p].conj() * bvec[q]) * inv_r2
                                - cross
                                    * inv_r2
                                    * (d_s[p] * bvec[q] + bvec[p].conj() * d_s[q]);
                            ke[p][q] += w * v;
                            me[p][q] += w * shape[p] * shape[q];
                        }
                    }
                }
            }
            // Mirror the upper triangle so the element matrix is exactly
            // Hermitian.
            for p in 0..4 {
                for q in 0..p {
                    ke[p][q] = ke[q][p].conj();
                    me[p][q] = me[q][p];
                }
            }

            for p in 0..4 {
                let Some(gp) = dofs[p] else { continue };
                for q in 0..4 {
                    let Some(gq) = dofs[q] else { continue };
                    k_triplets.push((gp, gq, ke[p][q]));
                    m_triplets.push((gp, gq, me[p][q]));
                }
            }
        }
    }

    Ok(HermitianFormPair {
        stiffness: Csr::from_triplets(n_dofs, k_triplets),
        mass: Csr::from_triplets(n_dofs, m_triplets),
        dof_map,
    })
}

/// Assemble the flux-line form: `β ≡ Φ` (the raw flux, so periodicity can
/// be probed at the solver level).
pub fn assemble_ab_form(
    dom: &StarDomain,
    flux: &Flux,
    kind: ProblemKind,
    mesh: &PolarMesh,
) -> Result<HermitianFormPair> {
    if kind == ProblemKind::LocalizedField {
        return Err(Error::InvalidArgument(
            "localized field uses assemble_localized_form".into(),
        ));
    }
    if *dom != mesh.domain {
        return Err(Error::Mesh("mesh was built for a different domain".into()));
    }
    let phi = flux.raw;
    assemble_core(mesh, |_r| phi, kind.dirichlet_inner())
}

/// Assemble the localized-field form on a simply connected domain: the
/// field is `b = 2πΦ/|ω|` on the disk of radius `hole_radius` and zero
/// outside, realized by the radial gauge with flux function
/// `β(r) = Φ r²/w²` inside and `Φ` outside (`w` = field support radius).
/// Pure natural boundary; requires a pole-offset mesh.
pub fn assemble_localized_form(
    dom: &StarDomain,
    phi: f64,
    mesh: &PolarMesh,
) -> Result<HermitianFormPair> {
    if !phi.is_finite() {
        return Err(Error::InvalidArgument("flux must be finite".into()));
    }
    if mesh.r_in != 0.0 {
        return Err(Error::Mesh(
            "localized field needs a pole-offset mesh (r_in = 0)".into(),
        ));
    }
    if *dom != mesh.domain {
        return Err(Error::Mesh("mesh was built for a different domain".into()));
    }
    let w = dom.hole_radius;
    assemble_core(
        mesh,
        move |r| {
            if r < w {
                phi * r * r / (w * w)
            } else {
                phi
            }
        },
        false,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_eccentric_annulus, reduce_flux};
    use crate::planar::mesh::PolarMesh;

    #[test]
    fn assembled_forms_are_exactly_hermitian() {
        let dom = make_eccentric_annulus(1.0, 2.0, 0.3).unwrap();
        let mesh = PolarMesh::uniform(&dom, 12, 24).unwrap();
        let flux = reduce_flux(0.37).unwrap();
        let forms =
            assemble_ab_form(&dom, &flux, ProblemKind::PerforatedDirichletInner, &mesh)
                .unwrap();
        assert_eq!(forms.stiffness.hermitian_defect(), 0.0);
        assert_eq!(forms.mass.symmetry_defect(), 0.0);
        assert_eq!(forms.dof_map.n_dofs(), 12 * 24);
    }

    #[test]
    fn zero_flux_form_is_real() {
        let dom = make_eccentric_annulus(1.0, 2.0, 0.2).unwrap();
        let mesh = PolarMesh::uniform(&dom, 10, 20).unwrap();
        let flux = reduce_flux(0.0).unwrap();
        let forms =
            assemble_ab_form(&dom, &flux, ProblemKind::PerforatedNeumannInner, &mesh)
                .unwrap();
        let max_im = forms
            .stiffness
            .vals
            .iter()
            .map(|v| v.im.abs())
            .fold(0.0, f64::max);
        assert_eq!(max_im, 0.0);
    }

    #[test]
    fn localized_rejects_wrong_mesh() {
        let dom = make_eccentric_annulus(0.5, 1.0, 0.0).unwrap();
        let mesh = PolarMesh::uniform(&dom, 10, 20).unwrap();
        assert!(assemble_localized_form(&dom, 1.0, &mesh).is_err());
    }

    #[test]
    fn ab_rejects_localized_kind() {
        let dom = make_eccentric_annulus(1.0, 2.0, 0.0).unwrap();
        let mesh = PolarMesh::uniform(&dom, 10, 20).unwrap();
        let flux = reduce_flux(0.5).unwrap();
        assert!(
            assemble_ab_form(&dom, &flux, ProblemKind::LocalizedField, &mesh).is_err()
        );
    }

    #[test]
    fn mass_is_total_area_against_constants() {
        // 1ᵀ M 1 = |Ω₀|: exact on the concentric annulus where the θ
        // quadrature sees constant coefficients, fourth-order accurate on
        // the eccentric one.
        let flux = reduce_flux(0.25).unwrap();
        for (delta, tol) in [(0.0, 1e-12), (0.3, 1e-5)] {
            let dom = make_eccentric_annulus(1.0, 2.0, delta).unwrap();
            let mesh = PolarMesh::uniform(&dom, 32, 64).unwrap();
            let forms =
                assemble_ab_form(&dom, &flux, ProblemKind::PerforatedNeumannInner, &mesh)
                    .unwrap();
            let ones =
                vec![num_complex::Complex64::new(1.0, 0.0); forms.dof_map.n_dofs()];
            let mut buf = ones.clone();
            forms.mass.matvec_complex(&ones, &mut buf);
            let total: f64 = buf.iter().map(|v| v.re).sum();
            let area = dom.perforated_area();
            assert!(
                (total - area).abs() < tol * area,
                "delta={delta}: mass total {total} vs area {area}"
            );
        }
    }
}
