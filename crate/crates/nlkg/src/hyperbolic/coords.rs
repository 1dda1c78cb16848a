use crate::error::{Error, Result};

/// (t, x) ↦ (ρ, y) with ρ = √(t² − x²), y = artanh(x/t); requires t > |x|.
pub fn to_hyperbolic(t: f64, x: f64) -> Result<(f64, f64)> {
    if !(t > x.abs()) {
        return Err(Error::OutOfRange(format!("(t, x) = ({t}, {x}) is not inside the light cone")));
    }
    Ok((((t - x) * (t + x)).sqrt(), (x / t).atanh()))
}

/// (ρ, y) ↦ (t, x) = (ρ cosh y, ρ sinh y).
pub fn from_hyperbolic(rho: f64, y: f64) -> (f64, f64) {
    (rho * y.cosh(), rho * y.sinh())
}
