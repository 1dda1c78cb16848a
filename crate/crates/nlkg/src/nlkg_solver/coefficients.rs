use serde::{Deserialize, Serialize};

use crate::grid_spectral::SpatialGrid;

/// Shape of the localized coefficient β(x).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum BetaFamily {
    Zero,
    /// A·exp(−x²/ℓ²)
    Gaussian {
        amp: f64,
        width: f64,
    },
    /// A·sech²(x/ℓ)
    Sech2 {
        amp: f64,
        width: f64,
    },
}

impl BetaFamily {
    pub fn name(&self) -> &'static str {
        match self {
            BetaFamily::Zero => "zero",
            BetaFamily::Gaussian { .. } => "gaussian",
            BetaFamily::Sech2 { .. } => "sech2",
        }
    }
}

/// Constant coefficient β₀ together with the variable coefficient β(x).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientProfile {
    pub beta0: f64,
    pub family: BetaFamily,
}

impl CoefficientProfile {
    pub fn new(beta0: f64, family: BetaFamily) -> Self {
        Self { beta0, family }
    }

    pub fn linear() -> Self {
        Self::new(0.0, BetaFamily::Zero)
    }

    pub fn is_linear(&self) -> bool {
        self.beta0 == 0.0 && matches!(self.family, BetaFamily::Zero)
    }

    pub fn beta(&self, x: f64) -> f64 {
        match self.family {
            BetaFamily::Zero => 0.0,
            BetaFamily::Gaussian { amp, width } => {
                let s = x / width;
                amp * (-s * s).exp()
            }
            BetaFamily::Sech2 { amp, width } => {
                let c = (x / width).cosh();
                amp / (c * c)
            }
        }
    }

    pub fn beta_prime(&self, x: f64) -> f64 {
        match self.family {
            BetaFamily::Zero => 0.0,
            BetaFamily::Gaussian { amp, width } => {
                let s = x / width;
                -2.0 * amp * s / width * (-s * s).exp()
            }
            BetaFamily::Sech2 { amp, width } => {
                let s = x / width;
                let c = s.cosh();
                -2.0 * amp * s.tanh() / (c * c * width)
            }
        }
    }

    /// β(x) on the grid.
    pub fn sample(&self, grid: &SpatialGrid) -> Vec<f64> {
        grid.points().into_iter().map(|x| self.beta(x)).collect()
    }

    /// β₀ + β(x) on the grid.
    pub fn total(&self, grid: &SpatialGrid) -> Vec<f64> {
        grid.points().into_iter().map(|x| self.beta0 + self.beta(x)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivative_matches_difference() {
        for fam in [BetaFamily::Gaussian { amp: 1.3, width: 2.0 }, BetaFamily::Sech2 { amp: -0.4, width: 1.5 }] {
            let c = CoefficientProfile::new(0.0, fam);
            for &x in &[-2.0, -0.3, 0.0, 0.7, 3.1] {
                let h = 1e-5;
                let fd = (c.beta(x + h) - c.beta(x - h)) / (2.0 * h);
                assert!((fd - c.beta_prime(x)).abs() < 1e-8, "{fam:?} at {x}");
            }
        }
    }

    #[test]
    fn even_and_tail_bounded() {
        for fam in [BetaFamily::Gaussian { amp: 1.0, width: 1.0 }, BetaFamily::Sech2 { amp: 1.0, width: 1.0 }] {
            let c = CoefficientProfile::new(0.0, fam);
            for i in 0..200 {
                let x = i as f64 * 0.1;
                assert_eq!(c.beta(x), c.beta(-x));
                if x >= 4.0 {
                    assert!(c.beta(x).abs() <= (-x).exp());
                }
            }
        }
    }
}
