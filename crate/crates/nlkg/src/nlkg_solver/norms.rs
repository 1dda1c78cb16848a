use super::coefficients::CoefficientProfile;
use super::state::{FieldState, Trajectory};
use crate::error::{invalid, Result};
use crate::grid_spectral::{japanese, spectral_derivative, SpatialGrid};

/// H = ∫ ½v² + ½(∂x u)² + ½u² − ¼(β₀+β)u⁴ dx.
pub fn hamiltonian(state: &FieldState, c: &CoefficientProfile) -> Result<f64> {
    let grid = &state.grid;
    let ux = spectral_derivative(grid, &state.u, 1)?;
    let x = grid.points();
    let mut acc = 0.0;
    for i in 0..grid.n() {
        let u = state.u[i];
        let u2 = u * u;
        acc += 0.5 * (state.v[i] * state.v[i] + ux[i] * ux[i] + u2) - 0.25 * (c.beta0 + c.beta(x[i])) * u2 * u2;
    }
    Ok(acc * grid.spacing())
}

fn in_region(t: f64, x: f64, r: f64) -> bool {
    t * t - x * x <= r * r
}

/// L² norm of `f·mask(x)·weight(x)` over the grid.
fn masked_norm(grid: &SpatialGrid, f: &[f64], w: impl Fn(f64) -> f64) -> f64 {
    let x = grid.points();
    (f.iter().zip(&x).map(|(v, &x)| (v * w(x)).powi(2)).sum::<f64>() * grid.spacing()).sqrt()
}

/// The four norms ‖⟨x⟩^{−2}χ ∂ u₁(t)‖ for ∂ ∈ {1, ∂x, ∂x², ∂x∂t}, χ the
/// sharp indicator of {t² − x² ≤ R²}.
pub fn weighted_u1_norms_state(u1: &FieldState, r: f64) -> Result<[f64; 4]> {
    if !(r >= 1.0) {
        return Err(invalid(format!("R = {r} must be at least 1")));
    }
    let grid = &u1.grid;
    let t = u1.t;
    let w = |x: f64| if in_region(t, x, r) { japanese(x).powi(-2) } else { 0.0 };
    let ux = spectral_derivative(grid, &u1.u, 1)?;
    let uxx = spectral_derivative(grid, &u1.u, 2)?;
    let uxt = spectral_derivative(grid, &u1.v, 1)?;
    Ok([masked_norm(grid, &u1.u, w), masked_norm(grid, &ux, w), masked_norm(grid, &uxx, w), masked_norm(grid, &uxt, w)])
}

/// [`weighted_u1_norms_state`] at a snapshot time of `traj_u1`.
pub fn weighted_u1_norms(traj_u1: &Trajectory, r: f64, t: f64) -> Result<[f64; 4]> {
    weighted_u1_norms_state(traj_u1.snapshot_at(t)?, r)
}

/// (‖χ ∂t u‖, ‖χ Zu‖) with Z = t∂x + x∂t, for the total field `u`.
pub fn bulk_growth_norms_state(u: &FieldState, r: f64) -> Result<(f64, f64)> {
    if !(r >= 1.0) {
        return Err(invalid(format!("R = {r} must be at least 1")));
    }
    let t = u.t;
    let chi = |x: f64| if in_region(t, x, r) { 1.0 } else { 0.0 };
    let zu = crate::hyperbolic::lorentz_boost(u)?;
    Ok((masked_norm(&u.grid, &u.v, chi), masked_norm(&u.grid, &zu, chi)))
}

/// [`bulk_growth_norms_state`] for u = u₀ + u₁ at a snapshot time.
pub fn bulk_growth_norms(traj_u0: &Trajectory, traj_u1: &Trajectory, r: f64, t: f64) -> Result<(f64, f64)> {
    let a = traj_u0.snapshot_at(t)?;
    let b = traj_u1.snapshot_at(t)?;
    let u = a.u.iter().zip(&b.u).map(|(x, y)| x + y).collect();
    let v = a.v.iter().zip(&b.v).map(|(x, y)| x + y).collect();
    bulk_growth_norms_state(&FieldState::new(a.grid, t, u, v)?, r)
}
