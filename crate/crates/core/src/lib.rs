//! Waveform relaxation for the saddle-structured linear DAEs that come out
//! of discretizing time-dependent Stokes equations in space, together with
//! the spectral machinery that predicts when and how fast the iteration
//! converges.
//!
//! Modules:
//! - [`linalg`]: dense factorizations and eigenvalue solvers.
//! - [`stokes`]: assembly of the saddle blocks, preconditioners, the
//!   closed-form reference solution and manufactured right-hand sides.
//! - [`bdf`]: backward differentiation formulae and stability regions.
//! - [`dabsor`]: the relaxed block waveform iteration, windowing, the
//!   monolithic reference solver and convergence-factor measurements.
//! - [`spectral`]: the iteration symbol, spectral radii, convergence
//!   domains and optimal parameters.

pub mod bdf;
pub mod dabsor;
pub mod linalg;
pub mod spectral;
pub mod stokes;
