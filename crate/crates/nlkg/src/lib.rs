//! Pseudo-spectral simulation and measurement toolkit for the one-dimensional
//! Klein-Gordon equation
//!
//! ```text
//! (∂t² − ∂x² + 1) u = β₀ u³ + β(x) u³,   (u, ∂t u)|_{t=1} = (f, g)
//! ```
//!
//! The crate is organised bottom-up:
//!
//! * [`grid_spectral`]: periodic grids, Fourier transforms, multipliers and
//!   Littlewood-Paley projections.
//! * [`propagator`]: exact linear flows and weighted operator norms of the
//!   Klein-Gordon propagator.
//! * [`nlkg_solver`]: Strang-split time integration, the u₀/u₁ source
//!   decomposition, the Hamiltonian and weighted bulk norms.
//! * [`hyperbolic`]: hyperbolic coordinates, hyperboloid sampling, Lorentz
//!   boosts, interior and exterior energies.
//! * [`asymptotics`]: the oscillation variable W₊, amplitude, limit profile and
//!   logarithmic phase fit.
//! * [`cli_io`]: configuration, fitting utilities, experiment drivers and
//!   report output.
//!
//! Data-parallel loops go through [`par`], which uses rayon when the
//! `parallel` feature is on and runs sequentially otherwise.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::type_complexity)]

pub mod asymptotics;
pub mod cli_io;
pub mod error;
pub mod grid_spectral;
pub mod hyperbolic;
pub mod nlkg_solver;
pub mod par;
pub mod propagator;

pub use error::{Error, Result};
