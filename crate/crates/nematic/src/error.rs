//! Error types shared across the library.

use thiserror::Error;

/// Everything that can go wrong in the numerical core.
#[derive(Debug, Error)]
pub enum NematicError {
    /// A scalar argument is outside its mathematical domain.
    #[error("domain error in {context}: {message}")]
    Domain { context: &'static str, message: String },

    /// A configuration value is invalid before any computation starts.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Two grids (or a grid and a field) that must match do not.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// A special-function evaluation left the representable range.
    #[error("overflow in {context} at argument {argument}")]
    Overflow { context: &'static str, argument: f64 },

    /// A time step blew up: some moment magnitude left the admissible ball.
    #[error("numerical instability: |n^({mode})| reached {max_abs:.6e} (limit 1 + 1e-6); reduce dt")]
    Instability { mode: usize, max_abs: f64 },

    /// A reconstructed density violated nonnegativity beyond tolerance.
    #[error("invalid density at grid point ({i}, {j}): {message}")]
    InvalidDensity { i: usize, j: usize, message: String },

    /// Vortex data is structurally unusable (coincident points, bad degrees).
    #[error("invalid vortex data: {0}")]
    InvalidVortexData(String),

    /// Boundary winding does not match the total vortex degree.
    #[error("degree mismatch: boundary winding {winding} but total vortex degree {total_degree}")]
    DegreeMismatch { winding: i32, total_degree: i32 },

    /// An iterative solver failed to reach its tolerance.
    #[error("solver failure in {context}: {message}")]
    SolverFailure { context: &'static str, message: String },

    /// A matrix argument violates a structural precondition.
    #[error("matrix error in {context}: {message}")]
    Matrix { context: &'static str, message: String },

    /// A curve/trajectory argument violates a precondition.
    #[error("curve error: {0}")]
    Curve(String),

    /// File I/O wrapper for snapshot and CSV writers.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// A snapshot file is malformed.
    #[error("bad snapshot: {0}")]
    BadSnapshot(String),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, NematicError>;

impl NematicError {
    /// Shorthand for `Domain` errors.
    pub fn domain(context: &'static str, message: impl Into<String>) -> Self {
        NematicError::Domain { context, message: message.into() }
    }
}
