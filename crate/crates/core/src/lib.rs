//! Continuity dynamics of time-dependent square matrices.
//!
//! The crate integrates `dM/dt = A(t)M + M B(t) + f[M]` for a selectable
//! determinant-scaled feedback `f`, tracks the determinant along the flow,
//! and computes singularity-proximity diagnostics. A quantum specialization
//! maps Hamiltonians to propagator problems via `A = −iH/ħ`.
//!
//! Modules:
//! - [`matrix`]: dense real/complex matrices, LU determinant and inverse,
//!   regularized inverse, matrix exponential.
//! - [`dynamics`]: evolution problems, RK4, Picard iteration, time-ordered
//!   products and the scalar determinant law.
//! - [`diagnostics`]: continuity functional, relative-rate norm, Jacobi
//!   determinant rate, log-determinant Lyapunov series.
//! - [`quantum`]: two-level Hamiltonians, propagator problems, exact `det U`.
//! - [`scenario`]: configuration, scenario runs, parameter sweeps and CSV output.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod functions;
pub mod matrix;
pub mod quantum;
pub mod scenario;

pub use error::{Error, Result};
pub use matrix::{ComplexMatrix, Matrix, RealMatrix, Scalar};
