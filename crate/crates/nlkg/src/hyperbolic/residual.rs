use serde::{Deserialize, Serialize};

use super::slice::HyperbolicSlice;
use crate::error::{invalid, Result};
use crate::grid_spectral::spectral_derivative;
use crate::nlkg_solver::CoefficientProfile;

/// Largest slice spacing accepted by [`hyperbolic_residual`].
pub const MAX_RESIDUAL_SPACING: f64 = 0.05;

/// Residual of the w-equation on the middle of three hyperboloids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicResidual {
    pub rho: f64,
    pub h: f64,
    pub y_window: f64,
    /// LHS − RHS at every y of the middle slice.
    pub field: Vec<f64>,
    /// max |LHS − RHS| over |y| ≤ y_window.
    pub max_abs: f64,
    /// max |w| over the same window.
    pub max_w: f64,
}

impl HyperbolicResidual {
    pub fn relative(&self) -> f64 {
        if self.max_w > 0.0 {
            self.max_abs / self.max_w
        } else {
            self.max_abs
        }
    }
}

/// (∂ρ² − ρ⁻²∂y² + ρ⁻² tanh y ∂y + 1 + 3/(4ρ²) sech² y) w
///   − ρ⁻¹ (β₀ + β(ρ sinh y)) sech y · w³
///
/// ∂ρ² by centred differences across the three slices, ∂y spectrally on the
/// periodic y-grid.
pub fn hyperbolic_residual(
    prev: &HyperbolicSlice,
    mid: &HyperbolicSlice,
    next: &HyperbolicSlice,
    c: &CoefficientProfile,
    y_window: f64,
) -> Result<HyperbolicResidual> {
    let h = mid.rho - prev.rho;
    if !(h > 0.0) || ((next.rho - mid.rho) - h).abs() > 1e-9 * mid.rho.max(1.0) {
        return Err(invalid("slices must be increasing and equally spaced in rho"));
    }
    if h > MAX_RESIDUAL_SPACING + 1e-12 {
        return Err(invalid(format!("slice spacing {h} exceeds {MAX_RESIDUAL_SPACING}")));
    }
    if prev.ygrid != mid.ygrid || next.ygrid != mid.ygrid {
        return Err(invalid("slices use different y-grids"));
    }
    let g = mid.ygrid;
    let rho = mid.rho;
    let wy = spectral_derivative(&g, &mid.w, 1)?;
    let wyy = spectral_derivative(&g, &mid.w, 2)?;
    let mut field = Vec::with_capacity(g.n());
    let (mut max_abs, mut max_w) = (0.0f64, 0.0f64);
    for i in 0..g.n() {
        let y = g.x(i);
        let w = mid.w[i];
        let sech = 1.0 / y.cosh();
        let wrr = (next.w[i] - 2.0 * w + prev.w[i]) / (h * h);
        let lhs =
            wrr - wyy[i] / (rho * rho) + y.tanh() * wy[i] / (rho * rho) + w + 0.75 * sech * sech * w / (rho * rho);
        let rhs = (c.beta0 + c.beta(rho * y.sinh())) * sech * w * w * w / rho;
        let r = lhs - rhs;
        if y.abs() <= y_window {
            max_abs = max_abs.max(r.abs());
            max_w = max_w.max(w.abs());
        }
        field.push(r);
    }
    Ok(HyperbolicResidual { rho, h, y_window, field, max_abs, max_w })
}
