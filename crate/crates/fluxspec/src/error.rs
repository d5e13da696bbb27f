//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The requested geometry cannot exist (hole area exceeds outer area,
    /// no admissible mean radius, radius function dips below the hole).
    #[error("geometry infeasible: {0}")]
    GeometryInfeasible(String),

    /// Hole touches or crosses the outer boundary.
    #[error("hole touches outer boundary: {0}")]
    HoleTouchesBoundary(String),

    #[error("mesh error: {0}")]
    Mesh(String),

    /// Assembled forms fail an integrity check (Hermiticity, mass positivity).
    #[error("assembly integrity: {0}")]
    AssemblyIntegrity(String),

    /// A numerically checked structural invariant failed beyond tolerance.
    #[error("invariant violation: {0}")]
    InvariantViolation(String),

    #[error(
        "eigensolver did not converge: residual {residual:.3e} after {iterations} iterations"
    )]
    Convergence {
        iterations: usize,
        residual: f64,
        /// Residual history, most recent last.
        trace: Vec<f64>,
    },

    /// Closed-form oracle could not bracket a root in its scan window.
    #[error("oracle failure: {0}")]
    OracleFailure(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
