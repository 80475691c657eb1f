//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Curvature measure dips below the convexity tolerance somewhere on the
    /// angle grid, so the coefficients do not describe a convex body.
    #[error("support function is not convex: min curvature {margin:.3e} < -{tol:.1e}")]
    NotConvex { margin: f64, tol: f64 },

    /// The forward mesh path needs a strictly positive curvature measure.
    #[error("body not strictly convex: min curvature measure {rho_min:.3e}")]
    NotStrictlyConvex { rho_min: f64 },

    /// Mesh generation could not reach the required element quality.
    #[error("meshing failure: {detail} (min angle {min_angle_deg:.2} deg)")]
    MeshQuality { min_angle_deg: f64, detail: String },

    #[error("assembly failure: triangle {index} is degenerate (area {area:.3e})")]
    DegenerateTriangle { index: usize, area: f64 },

    #[error(
        "eigensolver did not converge after {iterations} iterations \
         (worst relative residual {worst_residual:.3e})"
    )]
    EigenNonConvergence { iterations: usize, worst_residual: f64 },

    /// Boundary edge normal angles are not monotone around the boundary.
    #[error("Gauss map not invertible on mesh: {detail}")]
    GaussMapNotInvertible { detail: String },

    #[error("quadrature grid too coarse: refinement changed the value by {delta:.3e} > {tol:.1e}")]
    QuadratureTooCoarse { delta: f64, tol: f64 },

    #[error("s-function grid mismatch: {detail}")]
    GridMismatch { detail: String },

    #[error("invalid s-function file: {reason}")]
    InvalidSFunctionFile { reason: String },

    #[error("no admissible solution found: {diagnostics}")]
    NoAdmissibleSolution { diagnostics: String },

    #[error("invalid configuration: {reason}")]
    InvalidConfig { reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
