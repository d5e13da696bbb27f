//! Domain representations and shape families.
//!
//! All domains are perforated star-shaped sets described in polar
//! coordinates about the hole center: a disk hole of radius `hole_radius`
//! and an outer boundary given by a radius function `R(θ)`, either a
//! truncated trigonometric series or the exact closed form of an offset
//! circle. Areas follow from the coefficients via Parseval, so the
//! area-matched reference annulus is exact, not a quadrature estimate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of equispaced angles used for dense validity checks.
const VALIDATION_SAMPLES: usize = 4096;

/// A magnetic flux value together with its canonical reduction.
///
/// The eigenvalues computed by this crate are 1-periodic and even in the
/// flux, so every flux folds into `[0, 1/2]`. The original value is kept so
/// solvers can be driven with the raw flux when the folding itself is what
/// is being tested.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Flux {
    /// Flux as given.
    pub raw: f64,
    /// Folded representative in `[0, 1/2]`.
    pub reduced: f64,
    /// Integer closest to `raw`; the angular mode relabeling absorbed by
    /// periodicity.
    pub mode_shift: i64,
    /// True when the fold used evenness (`raw - mode_shift < 0`).
    pub sign_flipped: bool,
}

impl Flux {
    /// True when the raw value already lies in the canonical interval.
    pub fn is_canonical(&self) -> bool {
        self.raw == self.reduced
    }

    /// The canonical representative as a `Flux` of its own.
    pub fn canonical(&self) -> Flux {
        Flux {
            raw: self.reduced,
            reduced: self.reduced,
            mode_shift: 0,
            sign_flipped: false,
        }
    }
}

/// Fold a flux into `[0, 1/2]` by periodicity and evenness.
pub fn reduce_flux(phi: f64) -> Result<Flux> {
    if !phi.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "flux must be finite, got {phi}"
        )));
    }
    let mode_shift = phi.round();
    let frac = phi - mode_shift;
    let sign_flipped = frac < 0.0;
    Ok(Flux {
        raw: phi,
        reduced: frac.abs(),
        mode_shift: mode_shift as i64,
        sign_flipped,
    })
}

/// Concentric annulus with inner radius `r0` and outer radius `r1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnulusSpec {
    pub r0: f64,
    pub r1: f64,
}

impl AnnulusSpec {
    pub fn new(r0: f64, r1: f64) -> Result<Self> {
        if !(r0.is_finite() && r1.is_finite() && r0 > 0.0 && r1 > r0) {
            return Err(Error::InvalidArgument(format!(
                "annulus requires 0 < r0 < r1, got r0={r0}, r1={r1}"
            )));
        }
        Ok(Self { r0, r1 })
    }

    pub fn width(&self) -> f64 {
        self.r1 - self.r0
    }
}

/// Truncated trigonometric series `c0 + Σ aₖ cos kθ + Σ bₖ sin kθ`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrigSeries {
    pub c0: f64,
    #[serde(default)]
    pub cos: Vec<f64>,
    #[serde(default)]
    pub sin: Vec<f64>,
}

impl TrigSeries {
    pub fn constant(c0: f64) -> Self {
        Self {
            c0,
            cos: Vec::new(),
            sin: Vec::new(),
        }
    }

    pub fn eval(&self, theta: f64) -> f64 {
        let mut v = self.c0;
        for (k, a) in self.cos.iter().enumerate() {
            v += a * ((k + 1) as f64 * theta).cos();
        }
        for (k, b) in self.sin.iter().enumerate() {
            v += b * ((k + 1) as f64 * theta).sin();
        }
        v
    }

    pub fn eval_deriv(&self, theta: f64) -> f64 {
        let mut v = 0.0;
        for (k, a) in self.cos.iter().enumerate() {
            let m = (k + 1) as f64;
            v -= a * m * (m * theta).sin();
        }
        for (k, b) in self.sin.iter().enumerate() {
            let m = (k + 1) as f64;
            v += b * m * (m * theta).cos();
        }
        v
    }

    /// `(1/2)∫ R(θ)² dθ` from the coefficients (Parseval).
    pub fn enclosed_area(&self) -> f64 {
        let sq: f64 = self
            .cos
            .iter()
            .chain(self.sin.iter())
            .map(|c| c * c)
            .sum();
        std::f64::consts::PI * self.c0 * self.c0 + std::f64::consts::FRAC_PI_2 * sq
    }

    /// Series for `R(θ - shift)`, i.e. the boundary rotated by `shift`.
    pub fn rotated(&self, shift: f64) -> Self {
        let mut cos = vec![0.0; self.cos.len().max(self.sin.len())];
        let mut sin = vec![0.0; cos.len()];
        for k in 0..cos.len() {
            let m = (k + 1) as f64;
            let a = self.cos.get(k).copied().unwrap_or(0.0);
            let b = self.sin.get(k).copied().unwrap_or(0.0);
            let (sm, cm) = (m * shift).sin_cos();
            // a cos(m(θ-s)) + b sin(m(θ-s)) regrouped in cos(mθ), sin(mθ)
            cos[k] = a * cm - b * sm;
            sin[k] = a * sm + b * cm;
        }
        Self {
            c0: self.c0,
            cos,
            sin,
        }
    }
}

/// Eccentric-circle outer boundary: the circle of radius `r1` whose center
/// is offset by `delta` along the positive x-axis from the hole center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EccentricCircle {
    #[serde(rename = "R1")]
    pub r1: f64,
    pub delta: f64,
}

impl EccentricCircle {
    /// Radius seen from the hole center: `δ cos θ + sqrt(r1² − δ² sin² θ)`.
    pub fn eval(&self, theta: f64) -> f64 {
        let (s, c) = theta.sin_cos();
        self.delta * c + (self.r1 * self.r1 - self.delta * self.delta * s * s).sqrt()
    }

    pub fn eval_deriv(&self, theta: f64) -> f64 {
        let (s, c) = theta.sin_cos();
        let root = (self.r1 * self.r1 - self.delta * self.delta * s * s).sqrt();
        -self.delta * s - self.delta * self.delta * s * c / root
    }
}

/// Outer boundary representation. The closed form is kept for offset
/// circles so that no truncation error enters inequality margins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OuterBoundary {
    Eccentric {
        eccentric: EccentricCircle,
    },
    Series(TrigSeries),
}

impl OuterBoundary {
    pub fn eval(&self, theta: f64) -> f64 {
        match self {
            OuterBoundary::Eccentric { eccentric } => eccentric.eval(theta),
            OuterBoundary::Series(s) => s.eval(theta),
        }
    }

    pub fn eval_deriv(&self, theta: f64) -> f64 {
        match self {
            OuterBoundary::Eccentric { eccentric } => eccentric.eval_deriv(theta),
            OuterBoundary::Series(s) => s.eval_deriv(theta),
        }
    }

    fn enclosed_area(&self) -> f64 {
        match self {
            OuterBoundary::Eccentric { eccentric } => {
                std::f64::consts::PI * eccentric.r1 * eccentric.r1
            }
            OuterBoundary::Series(s) => s.enclosed_area(),
        }
    }
}

/// Perforated planar domain: disk hole of radius `hole_radius` centered at
/// `hole_center`, outer boundary star-shaped about the hole center.
///
/// Immutable after construction; construction validates that the radius
/// function stays positive and strictly outside the hole on a dense angular
/// sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StarDomain {
    pub hole_center: [f64; 2],
    pub hole_radius: f64,
    pub outer: OuterBoundary,
    #[serde(default)]
    pub label: String,
}

impl<'de> Deserialize<'de> for StarDomain {
    fn deserialize<D>(deserializer: D) -> std::result::Result<Self, D::Error>
    where
        D: serde::Deserializer<'de>,
    {
        #[derive(Deserialize)]
        struct Raw {
            hole_center: [f64; 2],
            hole_radius: f64,
            outer: OuterBoundary,
            #[serde(default)]
            label: String,
        }
        let raw = Raw::deserialize(deserializer)?;
        StarDomain::new(raw.hole_center, raw.hole_radius, raw.outer, raw.label)
            .map_err(serde::de::Error::custom)
    }
}

impl StarDomain {
    pub fn new(
        hole_center: [f64; 2],
        hole_radius: f64,
        outer: OuterBoundary,
        label: impl Into<String>,
    ) -> Result<Self> {
        if !(hole_radius.is_finite() && hole_radius > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "hole radius must be positive, got {hole_radius}"
            )));
        }
        let dom = Self {
            hole_center,
            hole_radius,
            outer,
            label: label.into(),
        };
        dom.validate()?;
        Ok(dom)
    }

    fn validate(&self) -> Result<()> {
        let mut min_r = f64::INFINITY;
        for i in 0..VALIDATION_SAMPLES {
            let theta = 2.0 * std::f64::consts::PI * i as f64 / VALIDATION_SAMPLES as f64;
            let r = self.outer.eval(theta);
            if !r.is_finite() {
                return Err(Error::GeometryInfeasible(format!(
                    "radius function not finite at θ={theta}"
                )));
            }
            min_r = min_r.min(r);
        }
        if min_r <= 0.0 {
            return Err(Error::GeometryInfeasible(format!(
                "radius function reaches {min_r} ≤ 0"
            )));
        }
        if min_r <= self.hole_radius {
            return Err(Error::HoleTouchesBoundary(format!(
                "min outer radius {min_r} does not exceed hole radius {}",
                self.hole_radius
            )));
        }
        Ok(())
    }

    /// Outer radius at angle `theta`, measured from the hole center.
    pub fn radius(&self, theta: f64) -> f64 {
        self.outer.eval(theta)
    }

    /// d/dθ of the outer radius.
    pub fn radius_deriv(&self, theta: f64) -> f64 {
        self.outer.eval_deriv(theta)
    }

    /// Area enclosed by the outer boundary, `|Ω| = (1/2)∫ R(θ)² dθ`,
    /// exact from the representation.
    pub fn outer_area(&self) -> f64 {
        self.outer.enclosed_area()
    }

    /// Area of the perforated region `|Ω| − |ω|`.
    pub fn perforated_area(&self) -> f64 {
        self.outer_area() - std::f64::consts::PI * self.hole_radius * self.hole_radius
    }

    /// The concentric annulus with the same hole area and the same outer
    /// area: `r0 = hole_radius`, `r1 = sqrt(|Ω|/π)`.
    pub fn matched_annulus(&self) -> Result<AnnulusSpec> {
        let r1 = (self.outer_area() / std::f64::consts::PI).sqrt();
        if r1 <= self.hole_radius {
            return Err(Error::GeometryInfeasible(format!(
                "matched outer radius {r1} does not exceed hole radius {}",
                self.hole_radius
            )));
        }
        AnnulusSpec::new(self.hole_radius, r1)
    }

    /// Mean outer radius `(1/2π)∫ R dθ`. Exact for series (the constant
    /// term); dense average for the closed-form circle.
    pub fn mean_outer_radius(&self) -> f64 {
        match &self.outer {
            OuterBoundary::Series(s) => s.c0,
            OuterBoundary::Eccentric { .. } => {
                let n = VALIDATION_SAMPLES;
                let sum: f64 = (0..n)
                    .map(|i| {
                        self.radius(2.0 * std::f64::consts::PI * i as f64 / n as f64)
                    })
                    .sum();
                sum / n as f64
            }
        }
    }

    pub fn min_outer_radius(&self) -> f64 {
        let n = VALIDATION_SAMPLES;
        (0..n)
            .map(|i| self.radius(2.0 * std::f64::consts::PI * i as f64 / n as f64))
            .fold(f64::INFINITY, f64::min)
    }

    /// True when the outer boundary is a circle concentric with the hole,
    /// so the domain coincides with its matched annulus.
    pub fn is_concentric_annulus(&self) -> bool {
        match &self.outer {
            OuterBoundary::Eccentric { eccentric } => eccentric.delta == 0.0,
            OuterBoundary::Series(s) => {
                s.cos.iter().chain(s.sin.iter()).all(|&c| c == 0.0)
            }
        }
    }

    /// Same domain with the outer boundary rotated by `shift` about the
    /// hole center. Only series boundaries rotate exactly in this
    /// representation.
    pub fn rotated(&self, shift: f64) -> Result<StarDomain> {
        match &self.outer {
            OuterBoundary::Series(s) => StarDomain::new(
                self.hole_center,
                self.hole_radius,
                OuterBoundary::Series(s.rotated(shift)),
                format!("{} rot{shift:+.4}", self.label),
            ),
            OuterBoundary::Eccentric { .. } => Err(Error::InvalidArgument(
                "rotation is only represented for trigonometric boundaries".into(),
            )),
        }
    }
}

/// Annulus whose outer circle is offset by `delta` from the hole center.
/// `delta = 0` gives the concentric annulus.
pub fn make_eccentric_annulus(r0: f64, r1: f64, delta: f64) -> Result<StarDomain> {
    if !(r0 > 0.0 && delta >= 0.0) || !r0.is_finite() || !delta.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "need r0 > 0 and delta ≥ 0, got r0={r0}, delta={delta}"
        )));
    }
    if r0 + delta >= r1 {
        return Err(Error::HoleTouchesBoundary(format!(
            "r0 + delta = {} ≥ r1 = {r1}",
            r0 + delta
        )));
    }
    StarDomain::new(
        [0.0, 0.0],
        r0,
        OuterBoundary::Eccentric {
            eccentric: EccentricCircle { r1, delta },
        },
        format!("eccentric r0={r0} r1={r1} delta={delta} (closed form)"),
    )
}

/// Disk of nominal radius `r1` with hole radius `r0` and a trigonometric
/// perturbation of the outer boundary. With `renormalize` the constant term
/// is solved from Parseval so the outer area equals `π r1²` exactly.
pub fn make_perturbed_disk(
    r1: f64,
    r0: f64,
    cos: &[f64],
    sin: &[f64],
    renormalize: bool,
) -> Result<StarDomain> {
    if !(r1 > 0.0 && r0 > 0.0 && r0 < r1) {
        return Err(Error::InvalidArgument(format!(
            "need 0 < r0 < r1, got r0={r0}, r1={r1}"
        )));
    }
    let sq: f64 = cos.iter().chain(sin.iter()).map(|c| c * c).sum();
    let c0 = if renormalize {
        let c0_sq = r1 * r1 - 0.5 * sq;
        if c0_sq <= 0.0 {
            return Err(Error::GeometryInfeasible(format!(
                "no admissible constant term: perturbation energy {sq} too large for r1={r1}"
            )));
        }
        c0_sq.sqrt()
    } else {
        r1
    };
    let series = TrigSeries {
        c0,
        cos: cos.to_vec(),
        sin: sin.to_vec(),
    };
    StarDomain::new(
        [0.0, 0.0],
        r0,
        OuterBoundary::Series(series),
        format!("perturbed disk r1={r1} r0={r0} renorm={renormalize}"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn reduce_flux_examples() {
        let f = reduce_flux(0.3).unwrap();
        assert_eq!(f.reduced, 0.3);
        assert_eq!(f.mode_shift, 0);
        assert!(!f.sign_flipped);
        assert!(f.is_canonical());

        let f = reduce_flux(1.7).unwrap();
        assert!((f.reduced - 0.3).abs() < 1e-15);
        assert_eq!(f.mode_shift, 2);
        assert!(f.sign_flipped);

        let f = reduce_flux(-0.5).unwrap();
        assert_eq!(f.reduced, 0.5);
    }

    #[test]
    fn reduce_flux_reconstruction_invariant() {
        for &phi in &[0.0, 0.3, -0.3, 1.7, -2.25, 0.5, -0.5, 7.0, 123.456] {
            let f = reduce_flux(phi).unwrap();
            assert!(f.reduced >= 0.0 && f.reduced <= 0.5, "phi={phi}");
            let sign = if f.sign_flipped { -1.0 } else { 1.0 };
            let rebuilt = f.mode_shift as f64 + sign * f.reduced;
            assert!((rebuilt - phi).abs() < 1e-12, "phi={phi} rebuilt={rebuilt}");
        }
    }

    #[test]
    fn reduce_flux_rejects_non_finite() {
        assert!(reduce_flux(f64::NAN).is_err());
        assert!(reduce_flux(f64::INFINITY).is_err());
    }

    #[test]
    fn outer_area_disk_and_parseval() {
        let d = make_perturbed_disk(2.0, 1.0, &[], &[], false).unwrap();
        assert!((d.outer_area() - 4.0 * PI).abs() < 1e-14);

        // R(θ) = 2 + 0.1 cos θ  →  |Ω| = π(4 + 0.005)
        let d = make_perturbed_disk(2.0, 1.0, &[0.1], &[], false).unwrap();
        assert!((d.outer_area() - PI * 4.005).abs() < 1e-13);
    }

    #[test]
    fn outer_area_eccentric_is_translation_invariant() {
        for &delta in &[0.0, 0.2, 0.5, 0.9] {
            let d = make_eccentric_annulus(1.0, 2.0, delta).unwrap();
            assert!((d.outer_area() - 4.0 * PI).abs() < 1e-13, "delta={delta}");
        }
    }

    #[test]
    fn eccentric_closed_form_values() {
        let d = make_eccentric_annulus(1.0, 2.0, 0.5).unwrap();
        assert!((d.radius(0.0) - 2.5).abs() < 1e-15);
        assert!((d.radius(PI) - 1.5).abs() < 1e-15);
        // derivative against a central difference
        let h = 1e-6;
        for &t in &[0.3, 1.2, 2.8, 4.4] {
            let fd = (d.radius(t + h) - d.radius(t - h)) / (2.0 * h);
            assert!((d.radius_deriv(t) - fd).abs() < 1e-8, "t={t}");
        }
    }

    #[test]
    fn eccentric_rejects_touching_hole() {
        assert!(matches!(
            make_eccentric_annulus(1.0, 2.0, 1.1),
            Err(Error::HoleTouchesBoundary(_))
        ));
    }

    #[test]
    fn matched_annulus_examples() {
        let d = make_eccentric_annulus(1.0, 2.0, 0.3).unwrap();
        let a = d.matched_annulus().unwrap();
        assert!((a.r0 - 1.0).abs() < 1e-15);
        assert!((a.r1 - 2.0).abs() < 1e-13);

        let d = make_perturbed_disk(2.0, 1.0, &[0.1], &[], false).unwrap();
        let a = d.matched_annulus().unwrap();
        assert!((a.r1 - 4.005f64.sqrt()).abs() < 1e-13);

        // fixed point on the concentric annulus
        let d = make_eccentric_annulus(1.0, 2.0, 0.0).unwrap();
        let a = d.matched_annulus().unwrap();
        assert_eq!((a.r0, a.r1), (1.0, 2.0));
        assert!(d.is_concentric_annulus());
    }

    #[test]
    fn perturbed_disk_renormalization() {
        // a2 = 0.2: c0 = sqrt(4 − 0.02), area exactly 4π
        let d = make_perturbed_disk(2.0, 1.0, &[0.0, 0.2], &[], true).unwrap();
        match &d.outer {
            OuterBoundary::Series(s) => {
                assert!((s.c0 - (4.0f64 - 0.02).sqrt()).abs() < 1e-15)
            }
            _ => panic!("expected series"),
        }
        assert!((d.outer_area() - 4.0 * PI).abs() / (4.0 * PI) < 1e-12);
    }

    #[test]
    fn perturbed_disk_rejects_large_perturbation() {
        // a1 = 3 makes R(θ) dip below the hole radius
        assert!(make_perturbed_disk(2.0, 1.0, &[3.0], &[], true).is_err());
    }

    #[test]
    fn series_rotation_preserves_radius_function() {
        let d = make_perturbed_disk(2.0, 1.0, &[0.15, 0.05], &[0.0, 0.1], true).unwrap();
        let shift = 0.7;
        let rot = d.rotated(shift).unwrap();
        for i in 0..64 {
            let t = 2.0 * PI * i as f64 / 64.0;
            assert!(
                (rot.radius(t) - d.radius(t - shift)).abs() < 1e-13,
                "t={t}"
            );
        }
        assert!((rot.outer_area() - d.outer_area()).abs() < 1e-12);
    }

    #[test]
    fn json_round_trip_both_representations() {
        let d = make_eccentric_annulus(1.0, 2.0, 0.3).unwrap();
        let s = serde_json::to_string(&d).unwrap();
        let back: StarDomain = serde_json::from_str(&s).unwrap();
        assert_eq!(d, back);

        let d = make_perturbed_disk(2.0, 1.0, &[0.1], &[0.05], true).unwrap();
        let s = serde_json::to_string(&d).unwrap();
        let back: StarDomain = serde_json::from_str(&s).unwrap();
        assert_eq!(d, back);
    }

    #[test]
    fn json_deserialize_validates() {
        let bad = r#"{"hole_center":[0,0],"hole_radius":3.0,
                      "outer":{"eccentric":{"R1":2.0,"delta":0.0}},"label":""}"#;
        assert!(serde_json::from_str::<StarDomain>(bad).is_err());
    }

    #[test]
    fn json_schema_shape() {
        let d = make_eccentric_annulus(1.0, 2.0, 0.25).unwrap();
        let v: serde_json::Value = serde_json::to_value(&d).unwrap();
        assert!(v["outer"]["eccentric"]["R1"].is_number());
        assert!(v["outer"]["eccentric"]["delta"].is_number());
        let d = make_perturbed_disk(2.0, 1.0, &[0.1], &[], false).unwrap();
        let v: serde_json::Value = serde_json::to_value(&d).unwrap();
        assert!(v["outer"]["c0"].is_number());
        assert!(v["outer"]["cos"].is_array());
    }
}
