//! Property tests for the geometry invariants.

use proptest::prelude::*;

use fluxspec::geometry::{
    make_eccentric_annulus, make_perturbed_disk, reduce_flux,
};

proptest! {
    /// Folding is 1-periodic and even.
    #[test]
    fn flux_fold_periodic_and_even(phi in -50.0f64..50.0, k in -5i64..=5) {
        let a = reduce_flux(phi).unwrap();
        let b = reduce_flux(phi + k as f64).unwrap();
        let c = reduce_flux(-phi).unwrap();
        prop_assert!((a.reduced - b.reduced).abs() < 1e-9 * (1.0 + phi.abs()));
        prop_assert!((a.reduced - c.reduced).abs() < 1e-12);
        prop_assert!(a.reduced >= 0.0 && a.reduced <= 0.5);
    }

    /// Offsetting the outer circle never changes the enclosed area.
    #[test]
    fn eccentric_area_is_translation_invariant(
        r0 in 0.05f64..1.0,
        width in 0.2f64..3.0,
        frac in 0.0f64..0.95,
    ) {
        let r1 = r0 + width;
        let delta = frac * (r1 - r0 - 1e-9);
        let dom = make_eccentric_annulus(r0, r1, delta).unwrap();
        let area = dom.outer_area();
        let expect = std::f64::consts::PI * r1 * r1;
        prop_assert!((area - expect).abs() < 1e-11 * expect);
        // matched annulus reproduces the nominal radii
        let m = dom.matched_annulus().unwrap();
        prop_assert!((m.r0 - r0).abs() < 1e-14);
        prop_assert!((m.r1 - r1).abs() < 1e-11 * r1);
    }

    /// Renormalized perturbed disks hit the target area exactly.
    #[test]
    fn renormalized_disk_area(
        a1 in -0.15f64..0.15,
        a2 in -0.15f64..0.15,
        b1 in -0.15f64..0.15,
    ) {
        let dom = match make_perturbed_disk(2.0, 1.0, &[a1, a2], &[b1], true) {
            Ok(d) => d,
            Err(_) => return Ok(()), // perturbation dipped below the hole
        };
        let expect = 4.0 * std::f64::consts::PI;
        prop_assert!((dom.outer_area() - expect).abs() < 1e-12 * expect);
    }

    /// Radius-function derivative matches a finite difference everywhere.
    #[test]
    fn radius_derivative_consistency(
        delta in 0.0f64..0.8,
        theta in 0.0f64..std::f64::consts::TAU,
    ) {
        let dom = make_eccentric_annulus(1.0, 2.0, delta).unwrap();
        let h = 1e-6;
        let fd = (dom.radius(theta + h) - dom.radius(theta - h)) / (2.0 * h);
        prop_assert!((dom.radius_deriv(theta) - fd).abs() < 1e-7);
    }
}
