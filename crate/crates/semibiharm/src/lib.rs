//! Numerical toolkit for semi-biharmonic maps on constant-curvature spaces.
//!
//! The crate generates the explicit solution families of the interpolating
//! energy `delta1 * E_dirichlet + delta2 * E_bienergy`, evaluates the
//! associated Euler-Lagrange residuals with finite differences, and verifies
//! the identities that solutions must satisfy (conservation law, Bochner
//! formula, energy-momentum tensor, Noether currents) by grid-refinement
//! convergence studies.

pub mod bessel;
pub mod cli;
pub mod conservation;
pub mod curve;
pub mod error;
pub mod families;
pub mod fd;
pub mod geometry;
pub mod io;
pub mod plane;
pub mod radial;
pub mod report;
pub mod spline;
pub mod variational;

pub use error::{Error, Result};
