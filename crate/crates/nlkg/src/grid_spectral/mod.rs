//! Uniform periodic grids, discrete Fourier transforms, Fourier multipliers
//! and Littlewood-Paley projections.

mod fourier;
mod grid;
mod lp;

pub use fourier::{
    apply_multiplier, apply_real_multiplier, forward_transform, inverse_transform, inverse_transform_complex, japanese,
    spectral_derivative, Fft, Spectrum,
};
pub use grid::SpatialGrid;
pub use lp::{bump, coefficient_b, lp_project_band, lp_project_high, lp_project_low, psi, CoefficientB};
