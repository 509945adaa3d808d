//! Global minimization of n-dimensional double-well quartic polynomials
//! `1/2 (1/2 ||Bx - c||^2 - d)^2 + 1/2 x^T A x - f^T x` by canonical duality.
//!
//! The pipeline is: space reduction over the null space of B (which either
//! certifies unboundedness or makes B^T B positive definite), simultaneous
//! diagonalization of A and B^T B by congruence, and maximization of the
//! concave one-dimensional dual, including the boundary case whose solution
//! set is a sphere. A linearly constrained convex reformulation in lambda
//! and brute-force oracles round out the library.

pub mod diagonalize;
pub mod dual;
pub mod dual_dual;
pub mod error;
pub mod ginzburg_landau;
pub mod instance;
pub mod oracle;
pub mod pipeline;
pub mod presets;
pub mod reduction;

pub use error::{DwellError, Result};
pub use instance::DwpInstance;
pub use pipeline::{solve, SolveReport, SolveStatus};
