//! Eigenvalue solvers and shape-comparison certificates for planar magnetic
//! Laplacians whose field is carried entirely by a circulation (a flux line
//! through the hole of a perforated domain, or a field localized on a small
//! disk of a simply connected one).
//!
//! The crate is organized around one question: among perforated domains of
//! fixed hole area and fixed outer area, how does the lowest eigenvalue
//! compare with that of the concentric annulus? It provides
//!
//! - [`geometry`]: star-shaped perforated domains, shape families, exact
//!   areas and the area-matched reference annulus;
//! - [`radial`]: the separated one-dimensional mode problems on the
//!   annulus, closed-form half-flux and zero-flux oracles, and ground-state
//!   monotonicity diagnostics;
//! - [`planar`]: mapped-polar finite element assembly of the full
//!   two-dimensional quadratic forms and a deterministic sparse Hermitian
//!   eigensolver;
//! - [`certificates`]: explicit radial trial states whose Rayleigh
//!   quotients certify the annulus comparison with computable error bars;
//! - [`harness`]: a config-driven experiment runner emitting CSV/JSON
//!   verification reports.

pub mod certificates;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod planar;
pub mod radial;

pub use error::{Error, Result};
