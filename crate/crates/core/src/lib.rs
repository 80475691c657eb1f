//! Forward and inverse numerical toolkit for the clamped vibrating plate.
//!
//! The forward path meshes a planar convex body, solves the clamped
//! biharmonic eigenproblem with a Morley nonconforming element, and converts
//! the boundary traces of the eigenfunction Laplacians into normalized
//! boundary spectral data ("s-functions") parameterized by the outward normal
//! angle. The inverse path assembles a quadratic system in the Fourier
//! coefficients of the unknown body's support function from given s-functions
//! and solves it by damped multi-start Gauss-Newton, filtering reconstructions
//! for convexity.
//!
//! Modules:
//! - [`convex`]: support-function calculus, Minkowski algebra, boundary
//!   integrals of normal-dependent functions, difference-of-convex basis
//!   splits.
//! - [`plate`]: meshing, Morley assembly, generalized eigensolver, boundary
//!   Laplacian traces and the eigenfrequency boundary identity check.
//! - [`sfunction`]: s-function extraction, normalization checks,
//!   serialization.
//! - [`inverse`]: quadratic reconstruction system and its solver.

pub mod convex;
pub mod error;
pub mod inverse;
mod par;
pub mod plate;
pub mod sfunction;

pub use error::{Error, Result};
