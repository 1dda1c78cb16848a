use super::fourier::{apply_real_multiplier, forward_transform, inverse_transform};
use super::grid::SpatialGrid;
use crate::error::{invalid, Error, Result};
use crate::nlkg_solver::CoefficientProfile;

fn g(s: f64) -> f64 {
    if s > 0.0 {
        (-1.0 / s).exp()
    } else {
        0.0
    }
}

/// Smooth even bump φ: 1 on |η| ≤ 1, 0 on |η| ≥ 2, monotone in between.
pub fn bump(eta: f64) -> f64 {
    let a = eta.abs();
    if a <= 1.0 {
        1.0
    } else if a >= 2.0 {
        0.0
    } else {
        let l = g(2.0 - a);
        l / (l + g(a - 1.0))
    }
}

/// Dyadic band symbol ψ(η) = φ(η) − φ(2η), supported in 1/2 ≤ |η| ≤ 2.
pub fn psi(eta: f64) -> f64 {
    bump(eta) - bump(2.0 * eta)
}

/// P_{≤λ} f with symbol φ(ξ/λ); λ is used as given, without dyadic rounding.
pub fn lp_project_low(grid: &SpatialGrid, f: &[f64], lambda: f64) -> Result<Vec<f64>> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(invalid(format!("cutoff λ = {lambda} must be positive")));
    }
    let s = forward_transform(grid, f)?;
    Ok(inverse_transform(&apply_real_multiplier(&s, |xi| bump(xi / lambda))?))
}

/// P_{>λ} f = f − P_{≤λ} f.
pub fn lp_project_high(grid: &SpatialGrid, f: &[f64], lambda: f64) -> Result<Vec<f64>> {
    let low = lp_project_low(grid, f, lambda)?;
    Ok(f.iter().zip(&low).map(|(a, b)| a - b).collect())
}

/// P_k f with symbol ψ(ξ/2^k).
pub fn lp_project_band(grid: &SpatialGrid, f: &[f64], k: i32) -> Result<Vec<f64>> {
    let scale = 2f64.powi(k);
    if 2.0 * scale > grid.nyquist() {
        return Err(Error::OutOfRange(format!(
            "band k = {k} reaches 2^(k+1) = {} above the Nyquist wavenumber {}",
            2.0 * scale,
            grid.nyquist()
        )));
    }
    let s = forward_transform(grid, f)?;
    Ok(inverse_transform(&apply_real_multiplier(&s, |xi| psi(xi / scale))?))
}

/// Samples of 𝓑(ρ, y) = β₀/cosh y + β(ρ sinh y)/cosh y and of ∂ρ𝓑.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientB {
    pub values: Vec<f64>,
    pub drho: Vec<f64>,
}

pub fn coefficient_b(rho: f64, ygrid: &SpatialGrid, c: &CoefficientProfile) -> Result<CoefficientB> {
    if !(rho >= 1.0) {
        return Err(invalid(format!("ρ = {rho} must be at least 1")));
    }
    let mut values = Vec::with_capacity(ygrid.n());
    let mut drho = Vec::with_capacity(ygrid.n());
    for y in ygrid.points() {
        let (sh, ch) = (y.sinh(), y.cosh());
        let x = rho * sh;
        values.push((c.beta0 + c.beta(x)) / ch);
        drho.push(c.beta_prime(x) * sh / ch);
    }
    Ok(CoefficientB { values, drho })
}
