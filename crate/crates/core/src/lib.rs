//! Exponential B-spline Galerkin solver for the viscous Burgers equation
//!
//! ```text
//! u_t + u u_x - ν u_xx = 0,   a ≤ x ≤ b
//! ```
//!
//! The solution is expanded in exponential (tension) B-splines `φ_{-1} … φ_{N+1}`
//! on a uniform grid, the Galerkin weak form is integrated element by element,
//! and the resulting ODE system is advanced with Crank–Nicolson plus a short
//! inner iteration for the nonlinear term. Dirichlet data are imposed by
//! eliminating the two outermost coefficients.
//!
//! Modules, bottom-up:
//!
//! - [`basis`]: the splines and their derivatives
//! - [`elements`]: Gauss–Legendre quadrature and element matrices
//! - [`linalg`]: Thomas algorithm and banded LU
//! - [`stepper`]: assembly, initial fit, time loop
//! - [`problems`]: shock and travelling-wave test cases, L∞ error
//! - [`tuner`]: scan of the tension parameter `p`
//! - [`cli`]: command-line driver and output files

pub mod basis;
pub mod cli;
pub mod elements;
pub mod error;
pub mod linalg;
pub mod problems;
pub mod stepper;
pub mod tuner;

pub use basis::BasisParams;
pub use elements::{gauss_legendre, ElementMatrices, QuadratureRule};
pub use error::{Error, Result};
pub use problems::{ProblemSpec, Snapshot};
pub use stepper::{run, CoefficientVector, SolverConfig};
