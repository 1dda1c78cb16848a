use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform periodic grid of `n` points covering `[−L/2, L/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpatialGrid {
    n: usize,
    length: f64,
}

impl SpatialGrid {
    pub fn new(n: usize, length: f64) -> Result<Self> {
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("n = {n} must be a power of two and at least 16")));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!("length = {length} must be positive")));
        }
        Ok(Self { n, length })
    }

    /// Grid on `[−half_width, half_width)`, used for the y-variable on hyperboloids.
    pub fn symmetric(n: usize, half_width: f64) -> Result<Self> {
        Self::new(n, 2.0 * half_width)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn origin(&self) -> f64 {
        -0.5 * self.length
    }

    pub fn x(&self, i: usize) -> f64 {
        self.origin() + i as f64 * self.spacing()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    /// Signed mode number of FFT slot `j`, in `−n/2 .. n/2−1`.
    pub fn mode(&self, j: usize) -> i64 {
        if j < self.n / 2 {
            j as i64
        } else {
            j as i64 - self.n as i64
        }
    }

    /// Wavenumber ξ_j = 2πj/L of FFT slot `j`.
    pub fn wavenumber(&self, j: usize) -> f64 {
        2.0 * PI * self.mode(j) as f64 / self.length
    }

    /// All wavenumbers in FFT slot order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.wavenumber(j)).collect()
    }

    pub fn nyquist(&self) -> f64 {
        PI / self.spacing()
    }

    pub fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::LengthMismatch { expected: self.n, got: len });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes() {
        assert!(SpatialGrid::new(8, 1.0).is_err());
        assert!(SpatialGrid::new(100, 1.0).is_err());
        assert!(SpatialGrid::new(64, 0.0).is_err());
        assert!(SpatialGrid::new(64, f64::NAN).is_err());
    }

    #[test]
    fn geometry() {
        let g = SpatialGrid::new(64, 32.0).unwrap();
        assert_eq!(g.spacing() * g.n() as f64, g.length());
        assert_eq!(g.x(0), -16.0);
        assert_eq!(g.x(32), 0.0);
        assert_eq!(g.mode(31), 31);
        assert_eq!(g.mode(32), -32);
        assert!((g.wavenumber(1) - 2.0 * PI / 32.0).abs() < 1e-15);
    }
}
