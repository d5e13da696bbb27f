//! Trial-state certificates.
//!
//! The annulus ground state u extends to an explicit radial trial function
//! on any admissible perforated domain: zero inside the hole (Dirichlet
//! variant), u(r) across the annulus span, frozen at u(r1*) outside.
//! Plugging it into the Rayleigh quotient of the domain yields a computable
//! upper bound whose comparison against the annulus eigenvalue carries the
//! whole shape inequality — the mass gained outside the matched annulus
//! exceeds the mass lost inside, while the energy moves the other way.
//! All quantities here are reported with error bars from quadrature and
//! interpolation, never as bare numbers, because the inequalities being
//! certified are strict and only meaningful relative to a stated tolerance.

use serde::Serialize;

use crate::error::Result;
use crate::geometry::{AnnulusSpec, Flux, StarDomain};
use crate::radial::{self, InnerBc, ModeProblem};

/// Default element count for the radial profile behind a trial state.
pub const DEFAULT_PROFILE_ELEMENTS: usize = 16384;
/// Default number of angular quadrature points.
pub const DEFAULT_QUAD_N: usize = 512;

/// 4-point Gauss–Legendre rule on [-1, 1].
const GL4_X: [f64; 4] = [
    -0.861136311594052575,
    -0.339981043584856265,
    0.339981043584856265,
    0.861136311594052575,
];
const GL4_W: [f64; 4] = [
    0.347854845137453857,
    0.652145154862546143,
    0.652145154862546143,
    0.347854845137453857,
];

/// Radial profile with cubic Hermite interpolation between solver nodes
/// (nodal derivatives from second-order differences), extended by zero (or
/// the inner value for the Neumann variant) below the annulus and by the
/// constant outer value beyond it.
#[derive(Debug, Clone)]
struct CubicProfile {
    r0: f64,
    r1: f64,
    h: f64,
    u: Vec<f64>,
    du: Vec<f64>,
    inner_bc: InnerBc,
}

impl CubicProfile {
    fn from_samples(grid: &[f64], u: &[f64], inner_bc: InnerBc) -> Self {
        let n = grid.len();
        let h = grid[1] - grid[0];
        let mut du = vec![0.0; n];
        du[0] = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h);
        du[n - 1] = (3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) / (2.0 * h);
        for i in 1..n - 1 {
            du[i] = (u[i + 1] - u[i - 1]) / (2.0 * h);
        }
        Self {
            r0: grid[0],
            r1: grid[n - 1],
            h,
            u: u.to_vec(),
            du,
            inner_bc,
        }
    }

    fn outer_value(&self) -> f64 {
        *self.u.last().unwrap()
    }

    fn cell_of(&self, r: f64) -> usize {
        (((r - self.r0) / self.h) as usize).min(self.u.len() - 2)
    }

    fn eval(&self, r: f64) -> f64 {
        if r >= self.r1 {
            return self.outer_value();
        }
        if r <= self.r0 {
            return match self.inner_bc {
                InnerBc::Dirichlet => 0.0,
                InnerBc::Neumann => self.u[0],
            };
        }
        let c = self.cell_of(r);
        let t = (r - (self.r0 + c as f64 * self.h)) / self.h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.u[c]
            + h10 * self.h * self.du[c]
            + h01 * self.u[c + 1]
            + h11 * self.h * self.du[c + 1]
    }

    fn eval_deriv(&self, r: f64) -> f64 {
        if r >= self.r1 || r <= self.r0 {
            return 0.0;
        }
        let c = self.cell_of(r);
        let t = (r - (self.r0 + c as f64 * self.h)) / self.h;
        let t2 = t * t;
        let h00 = 6.0 * t2 - 6.0 * t;
        let h10 = 3.0 * t2 - 4.0 * t + 1.0;
        let h01 = -6.0 * t2 + 6.0 * t;
        let h11 = 3.0 * t2 - 2.0 * t;
        (h00 * self.u[c] + h01 * self.u[c + 1]) / self.h
            + h10 * self.du[c]
            + h11 * self.du[c + 1]
    }
}

/// The paper-style radial trial state built from a matched-annulus ground
/// state.
#[derive(Debug, Clone)]
pub struct TrialState {
    pub source_annulus: AnnulusSpec,
    pub flux: Flux,
    pub inner_bc: InnerBc,
    /// Annulus eigenvalue λ(Ω₀*) the profile solves.
    pub lambda_annulus: f64,
    /// Richardson error estimate of `lambda_annulus`.
    pub lambda_annulus_error: f64,
    profile: CubicProfile,
}

impl TrialState {
    /// Trial function value at radius `r` from the hole center.
    pub fn eval(&self, r: f64) -> f64 {
        self.profile.eval(r)
    }

    /// Trial function radial derivative.
    pub fn eval_deriv(&self, r: f64) -> f64 {
        self.profile.eval_deriv(r)
    }

    /// `U(r) = |f′|² + (Φ²/r²) f²`, the energy density of the radial state.
    pub fn energy_density(&self, r: f64) -> f64 {
        let phi = self.flux.reduced;
        let d = self.eval_deriv(r);
        let v = self.eval(r);
        d * d + phi * phi / (r * r) * v * v
    }
}

/// Solve the matched annulus and package its ground state as a trial state.
/// The canonical flux representative is used throughout: the certified
/// quantities are gauge invariants.
pub fn build_trial_state(
    dom: &StarDomain,
    flux: &Flux,
    inner_bc: InnerBc,
    n_elements: usize,
) -> Result<TrialState> {
    let annulus = dom.matched_annulus()?;
    let canonical = flux.canonical();
    let problem = ModeProblem {
        annulus,
        flux: canonical,
        mode: 0,
        inner_bc,
    };
    let res = radial::solve_mode(&problem, n_elements)?;
    Ok(TrialState {
        source_annulus: annulus,
        flux: canonical,
        inner_bc,
        lambda_annulus: res.mu,
        lambda_annulus_error: res.estimated_error,
        profile: CubicProfile::from_samples(&res.grid, &res.u, inner_bc),
    })
}

/// Rayleigh-quotient certificate of a trial state on a domain.
#[derive(Debug, Clone, Serialize)]
pub struct CertificateReport {
    pub rq_value: f64,
    pub lambda_annulus: f64,
    /// Filled by [`CertificateReport::with_domain_eigenvalue`].
    pub lambda_domain: Option<f64>,
    pub lambda_domain_error: Option<f64>,
    /// `‖f‖²(Ω₀) − ‖u‖²(Ω₀*)`; strictly positive off the annulus.
    pub mass_gap: f64,
    /// Annulus energy minus domain energy of f; nonnegative.
    pub energy_gap: f64,
    /// Quadrature + interpolation error bar on `rq_value`.
    pub rq_error: f64,
    pub lambda_annulus_error: f64,
    /// rq ≤ λ(Ω₀*) within tolerance.
    pub upper_bound_ok: bool,
    /// λ(Ω₀) ≤ rq within tolerance; `None` until a 2D value is supplied.
    pub sandwich_ok: Option<bool>,
}

impl CertificateReport {
    /// Attach an independently computed domain eigenvalue and check the
    /// lower half of the sandwich.
    pub fn with_domain_eigenvalue(mut self, lambda: f64, est_error: f64) -> Self {
        let tol = 10.0 * (est_error + self.rq_error) + 1e-12;
        self.sandwich_ok = Some(lambda <= self.rq_value + tol);
        self.lambda_domain = Some(lambda);
        self.lambda_domain_error = Some(est_error);
        self
    }

    /// Fixed-schema CSV row:
    /// `rq,lambda_annulus,lambda_domain,mass_gap,energy_gap,rq_error,upper_bound_ok,sandwich_ok`.
    pub fn csv_row(&self) -> String {
        format!(
            "{:.12e},{:.12e},{},{:.12e},{:.12e},{:.3e},{},{}",
            self.rq_value,
            self.lambda_annulus,
            self.lambda_domain
                .map(|v| format!("{v:.12e}"))
                .unwrap_or_default(),
            self.mass_gap,
            self.energy_gap,
            self.rq_error,
            self.upper_bound_ok,
            self.sandwich_ok.map(|b| b.to_string()).unwrap_or_default(),
        )
    }
}

/// `(∫ f² r dr, ∫ (f′² + Φ²f²/r²) r dr)` over `[lo, hi] ⊆ [r0, r1]`, split
/// at profile-cell boundaries so the polynomial part of the integrand is
/// handled exactly by the 4-point rule.
fn segment_integrals(f: &TrialState, lo: f64, hi: f64) -> (f64, f64) {
    let r0 = f.source_annulus.r0;
    let phi = f.flux.reduced;
    let h = f.profile.h;
    let cells = f.profile.u.len() - 1;
    let first = (((lo - r0) / h) as usize).min(cells - 1);
    let mut mass = 0.0;
    let mut energy = 0.0;
    for c in first..cells {
        let a = (r0 + c as f64 * h).max(lo).min(hi);
        let b = (r0 + (c + 1) as f64 * h).min(hi);
        if b <= a {
            break;
        }
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        for (x, w) in GL4_X.iter().zip(GL4_W.iter()) {
            let r = mid + half * x;
            let wq = w * half;
            let v = f.eval(r);
            let d = f.eval_deriv(r);
            mass += wq * v * v * r;
            energy += wq * (d * d * r + phi * phi * v * v / r);
        }
    }
    (mass, energy)
}

/// Numerator and denominator of the Rayleigh quotient of `f` over the
/// region `{r0 < r < R(θ)}` for one set of angular nodes.
fn quotient_integrals(f: &TrialState, dom: &StarDomain, quad_n: usize) -> (f64, f64) {
    let r0 = f.source_annulus.r0;
    let r1 = f.source_annulus.r1;
    let phi = f.flux.reduced;
    let dth = 2.0 * std::f64::consts::PI / quad_n as f64;
    let mut num = 0.0;
    let mut den = 0.0;
    for j in 0..quad_n {
        let theta = (j as f64 + 0.5) * dth;
        let big_r = dom.radius(theta);
        let cap = big_r.min(r1);
        let (mut den_t, mut num_t) = segment_integrals(f, r0, cap);
        // Constant tail beyond the annulus: f = u(r1), f′ = 0; both
        // integrals close in elementary form.
        if big_r > r1 {
            let fv = f.profile.outer_value();
            num_t += phi * phi * fv * fv * (big_r / r1).ln();
            den_t += fv * fv * 0.5 * (big_r * big_r - r1 * r1);
        }
        num += num_t * dth;
        den += den_t * dth;
    }
    (num, den)
}

/// Evaluate the certificate: Rayleigh quotient of the trial state over the
/// domain, the mass and energy gaps against the matched annulus, and error
/// bars.
pub fn rayleigh_quotient(
    f: &TrialState,
    dom: &StarDomain,
    quad_n: usize,
) -> Result<CertificateReport> {
    if quad_n < 64 {
        return Err(crate::error::Error::InvalidArgument(format!(
            "need at least 64 angular quadrature points, got {quad_n}"
        )));
    }
    let (num, den) = quotient_integrals(f, dom, quad_n);
    let (num_c, den_c) = quotient_integrals(f, dom, quad_n / 2);
    let rq = num / den;
    let rq_coarse = num_c / den_c;
    let quad_err = (rq - rq_coarse).abs();

    // Interpolation error: on the matched annulus itself the quotient must
    // reproduce the annulus eigenvalue; the defect measures the cubic
    // interpolant against the underlying solve.
    let two_pi = 2.0 * std::f64::consts::PI;
    let (num_a, den_a) = annulus_integrals(f);
    let interp_err = (num_a / den_a - f.lambda_annulus).abs();
    let rq_error = quad_err + interp_err;

    let mass_gap = den - two_pi * den_a;
    let energy_gap = two_pi * num_a - num;
    let tol = 10.0 * (rq_error + f.lambda_annulus_error) + 1e-12;
    Ok(CertificateReport {
        rq_value: rq,
        lambda_annulus: f.lambda_annulus,
        lambda_domain: None,
        lambda_domain_error: None,
        mass_gap,
        energy_gap,
        rq_error,
        lambda_annulus_error: f.lambda_annulus_error,
        upper_bound_ok: rq <= f.lambda_annulus + tol,
        sandwich_ok: None,
    })
}

/// 1D integrals of the profile over the annulus span (θ-independent):
/// `(∫(f′² + Φ²f²/r²) r dr, ∫ f² r dr)`.
fn annulus_integrals(f: &TrialState) -> (f64, f64) {
    let (den, num) = segment_integrals(f, f.source_annulus.r0, f.source_annulus.r1);
    (num, den)
}

/// Region-by-region decomposition of the mass and energy comparisons.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DecompositionTable {
    /// ∫ f² over Ω₀ ∩ Ω₀* (where f = u).
    pub mass_shared: f64,
    /// ∫ f² over Ω₀ ∖ Ω₀* (f frozen at the outer value).
    pub mass_outside: f64,
    /// ∫ u² over Ω₀* ∖ Ω₀.
    pub mass_missing: f64,
    pub energy_shared: f64,
    pub energy_outside: f64,
    pub energy_missing: f64,
    /// |Ω₀ ∖ Ω₀*| and |Ω₀* ∖ Ω₀|; equal by the area constraint.
    pub measure_outside: f64,
    pub measure_missing: f64,
    /// min over Ω₀* ∖ Ω₀ of U(r) − U(r1*); nonnegative by monotonicity of U.
    pub energy_density_slack: f64,
}

/// Compute the four region integrals behind the mass and energy lemmas,
/// the equal-measure identity, and the pointwise energy-density slack.
pub fn lemma_decomposition(
    f: &TrialState,
    dom: &StarDomain,
    quad_n: usize,
) -> Result<DecompositionTable> {
    if quad_n < 64 {
        return Err(crate::error::Error::InvalidArgument(format!(
            "need at least 64 angular quadrature points, got {quad_n}"
        )));
    }
    let r0 = f.source_annulus.r0;
    let r1 = f.source_annulus.r1;
    let phi = f.flux.reduced;
    let dth = 2.0 * std::f64::consts::PI / quad_n as f64;
    let u_r1 = f.profile.outer_value();
    let u_end_density = phi * phi / (r1 * r1) * u_r1 * u_r1;

    let mut t = DecompositionTable {
        mass_shared: 0.0,
        mass_outside: 0.0,
        mass_missing: 0.0,
        energy_shared: 0.0,
        energy_outside: 0.0,
        energy_missing: 0.0,
        measure_outside: 0.0,
        measure_missing: 0.0,
        energy_density_slack: f64::INFINITY,
    };

    for j in 0..quad_n {
        let theta = (j as f64 + 0.5) * dth;
        let big_r = dom.radius(theta);
        let cap = big_r.min(r1);
        let (mass, energy) = segment_integrals(f, r0, cap);
        t.mass_shared += mass * dth;
        t.energy_shared += energy * dth;
        if big_r > r1 {
            t.mass_outside += u_r1 * u_r1 * 0.5 * (big_r * big_r - r1 * r1) * dth;
            t.energy_outside += phi * phi * u_r1 * u_r1 * (big_r / r1).ln() * dth;
            t.measure_outside += 0.5 * (big_r * big_r - r1 * r1) * dth;
        } else if big_r < r1 {
            let (mass, energy) = segment_integrals(f, big_r, r1);
            t.mass_missing += mass * dth;
            t.energy_missing += energy * dth;
            t.measure_missing += 0.5 * (r1 * r1 - big_r * big_r) * dth;
            // Slack of the pointwise bound U(r) ≥ U(r1*) on this segment.
            for k in 0..8 {
                let r = big_r + (r1 - big_r) * (k as f64 + 0.5) / 8.0;
                let slack = f.energy_density(r) - u_end_density;
                t.energy_density_slack = t.energy_density_slack.min(slack);
            }
        }
    }
    if t.energy_density_slack == f64::INFINITY {
        t.energy_density_slack = 0.0;
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_eccentric_annulus, reduce_flux};

    #[test]
    fn concentric_quotient_reproduces_annulus_eigenvalue() {
        let dom = make_eccentric_annulus(1.0, 2.0, 0.0).unwrap();
        let flux = reduce_flux(0.5).unwrap();
        let f =
            build_trial_state(&dom, &flux, InnerBc::Dirichlet, DEFAULT_PROFILE_ELEMENTS)
                .unwrap();
        let rep = rayleigh_quotient(&f, &dom, 128).unwrap();
        assert!(
            (rep.rq_value - rep.lambda_annulus).abs() < 1e-8,
            "rq={} annulus={} diff={:.3e}",
            rep.rq_value,
            rep.lambda_annulus,
            (rep.rq_value - rep.lambda_annulus).abs()
        );
        assert!(rep.mass_gap.abs() < 1e-8);
        assert!(rep.energy_gap.abs() < 1e-8);
        assert!(rep.upper_bound_ok);
    }

    #[test]
    fn eccentric_certificate_signs() {
        let dom = make_eccentric_annulus(1.0, 2.0, 0.3).unwrap();
        let flux = reduce_flux(0.5).unwrap();
        let f =
            build_trial_state(&dom, &flux, InnerBc::Dirichlet, DEFAULT_PROFILE_ELEMENTS)
                .unwrap();
        let rep = rayleigh_quotient(&f, &dom, DEFAULT_QUAD_N).unwrap();
        assert!(rep.mass_gap > 10.0 * rep.rq_error, "mass gap {}", rep.mass_gap);
        assert!(rep.energy_gap > -10.0 * rep.rq_error, "energy gap {}", rep.energy_gap);
        assert!(rep.rq_value < rep.lambda_annulus, "strict upper bound");
        assert!(rep.upper_bound_ok);
    }

    #[test]
    fn neumann_zero_flux_quotient_vanishes() {
        let dom = make_eccentric_annulus(1.0, 2.0, 0.3).unwrap();
        let flux = reduce_flux(0.0).unwrap();
        let f = build_trial_state(&dom, &flux, InnerBc::Neumann, 512).unwrap();
        let rep = rayleigh_quotient(&f, &dom, 128).unwrap();
        assert!(rep.rq_value.abs() < 1e-10, "rq={}", rep.rq_value);
    }

    #[test]
    fn neumann_trial_state_positive_at_hole() {
        let dom = make_eccentric_annulus(1.0, 2.0, 0.3).unwrap();
        let flux = reduce_flux(0.5).unwrap();
        let f = build_trial_state(&dom, &flux, InnerBc::Neumann, 1024).unwrap();
        assert!(f.eval(1.0) > 0.0);
        let dirichlet =
            build_trial_state(&dom, &flux, InnerBc::Dirichlet, 1024).unwrap();
        assert_eq!(dirichlet.eval(0.8), 0.0);
        assert!((dirichlet.eval(1.0)).abs() < 1e-12);
    }

    #[test]
    fn decomposition_identities() {
        let dom = make_eccentric_annulus(1.0, 2.0, 0.3).unwrap();
        let flux = reduce_flux(0.5).unwrap();
        let f =
            build_trial_state(&dom, &flux, InnerBc::Dirichlet, DEFAULT_PROFILE_ELEMENTS)
                .unwrap();
        let rep = rayleigh_quotient(&f, &dom, DEFAULT_QUAD_N).unwrap();
        let dec = lemma_decomposition(&f, &dom, DEFAULT_QUAD_N).unwrap();

        // Equal-measure identity from the matched areas.
        assert!(
            (dec.measure_outside - dec.measure_missing).abs() < 1e-8,
            "measures {} vs {}",
            dec.measure_outside,
            dec.measure_missing
        );
        // mass_gap is exactly the difference of the decomposed integrals.
        let gap = dec.mass_outside - dec.mass_missing;
        assert!(
            (rep.mass_gap - gap).abs() < 1e-10,
            "gap {} vs decomposition {}",
            rep.mass_gap,
            gap
        );
        // U-monotonicity makes the pointwise slack nonnegative.
        assert!(dec.energy_density_slack >= -1e-10);
        // Concentric control: all symmetric-difference pieces vanish.
        let control = make_eccentric_annulus(1.0, 2.0, 0.0).unwrap();
        let dec0 = lemma_decomposition(&f, &control, 256).unwrap();
        assert_eq!(dec0.mass_outside, 0.0);
        assert_eq!(dec0.mass_missing, 0.0);
    }
}
