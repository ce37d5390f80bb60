//! Numerical laboratory for the forward and inverse boundary value problems
//! of a nonlinear Helmholtz equation `-Δu - κ²u + q u² = 0`, together with the
//! exact complex-vector algebra of the corresponding time-harmonic Maxwell
//! amplitude identities.
//!
//! The crate is organized around the measurement pipeline:
//!
//! - [`grid`]: unit-square lattice, boundary loop, quadrature.
//! - [`helmholtz`]: banded direct solver for the linear Dirichlet problem.
//! - [`nonlinear`]: small-data contraction iteration for the quadratic term.
//! - [`dnmap`]: Dirichlet-to-Neumann maps, second linearizations, and the
//!   boundary moment that equals the interior integral identity.
//! - [`cgo`]: complex-frequency vectors, exponential solutions, and
//!   boundary-killing corrections with decay diagnostics.
//! - [`reconstruct`]: Fourier-moment assembly and windowed inversion of the
//!   potential.
//! - [`runge`]: regularized least-squares realization of the Runge
//!   approximation property, nonvanishing probes, cavity discrimination.
//! - [`maxwell`]: Kerr and second-harmonic plane-wave families, integral
//!   identities, and pointwise susceptibility recovery.

pub mod band;
pub mod cgo;
pub mod dnmap;
pub mod error;
pub mod grid;
pub mod helmholtz;
pub mod io;
pub mod maxwell;
pub mod nonlinear;
pub mod reconstruct;
pub mod runge;

pub use error::{Error, Result};
