use serde::{Deserialize, Serialize};

use super::state::FieldState;
use crate::error::{invalid, Result};
use crate::grid_spectral::{apply_real_multiplier, forward_transform, japanese, SpatialGrid};

/// Relative level below which data is treated as zero when measuring its support.
const SUPPORT_LEVEL: f64 = 1e-10;
/// Minimum number of grid points per profile width.
const MIN_POINTS_PER_WIDTH: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Profile {
    Zero,
    /// A·exp(−(x−c)²/ℓ²)
    Gaussian {
        amp: f64,
        width: f64,
        center: f64,
    },
    /// A·sech((x−c)/ℓ)
    Sech {
        amp: f64,
        width: f64,
        center: f64,
    },
}

impl Profile {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Profile::Zero => 0.0,
            Profile::Gaussian { amp, width, center } => {
                let s = (x - center) / width;
                amp * (-s * s).exp()
            }
            Profile::Sech { amp, width, center } => amp / ((x - center) / width).cosh(),
        }
    }

    pub fn scaled(&self, k: f64) -> Self {
        match *self {
            Profile::Zero => Profile::Zero,
            Profile::Gaussian { amp, width, center } => Profile::Gaussian { amp: k * amp, width, center },
            Profile::Sech { amp, width, center } => Profile::Sech { amp: k * amp, width, center },
        }
    }

    fn width(&self) -> Option<f64> {
        match *self {
            Profile::Zero => None,
            Profile::Gaussian { width, .. } | Profile::Sech { width, .. } => Some(width),
        }
    }

    /// Interval where |profile| exceeds `SUPPORT_LEVEL` times its peak.
    pub fn support(&self) -> Option<(f64, f64)> {
        match *self {
            Profile::Zero => None,
            Profile::Gaussian { amp, width, center } if amp != 0.0 => {
                let r = width * (1.0 / SUPPORT_LEVEL).ln().sqrt();
                Some((center - r, center + r))
            }
            Profile::Sech { amp, width, center } if amp != 0.0 => {
                let r = width * (1.0 / SUPPORT_LEVEL).acosh();
                Some((center - r, center + r))
            }
            _ => None,
        }
    }
}

/// Initial data (f, g) at t = 1.
///
/// When `epsilon` is set, both profiles are rescaled by a common factor so
/// that the weighted norm equals it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialDataSpec {
    pub f: Profile,
    pub g: Profile,
    /// Regularity index N.
    pub regularity: u32,
    pub epsilon: Option<f64>,
}

impl InitialDataSpec {
    pub fn zero() -> Self {
        Self { f: Profile::Zero, g: Profile::Zero, regularity: 2, epsilon: None }
    }

    /// Width of the union of the supports of f and g.
    pub fn support_width(&self) -> f64 {
        data_support(&[self.f, self.g])
    }
}

/// Total width of the union hull of the supports of `profiles`.
pub fn data_support(profiles: &[Profile]) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for p in profiles {
        if let Some((a, b)) = p.support() {
            lo = lo.min(a);
            hi = hi.max(b);
        }
    }
    if hi > lo {
        hi - lo
    } else {
        0.0
    }
}

#[derive(Debug, Clone)]
pub struct InitialData {
    pub state: FieldState,
    /// Weighted norm of the sampled data.
    pub epsilon: f64,
    /// Profiles after rescaling.
    pub spec: InitialDataSpec,
}

fn weighted_sobolev(grid: &SpatialGrid, h: &[f64], weight_exp: f64, s: f64) -> Result<f64> {
    let weighted: Vec<f64> = grid.points().iter().zip(h).map(|(x, v)| japanese(*x).powf(weight_exp) * v).collect();
    let spec = forward_transform(grid, &weighted)?;
    Ok(apply_real_multiplier(&spec, |xi| japanese(xi).powf(s))?.l2_norm_sq().sqrt())
}

/// ‖⟨x⟩^{1+N/2} f‖_{H^{N+2}} + ‖⟨x⟩^{1+N/2} g‖_{H^{N+1}}.
pub fn weighted_data_norm(grid: &SpatialGrid, f: &[f64], g: &[f64], regularity: u32) -> Result<f64> {
    grid.check_len(f.len())?;
    grid.check_len(g.len())?;
    let w = 1.0 + regularity as f64 / 2.0;
    let n = regularity as f64;
    Ok(weighted_sobolev(grid, f, w, n + 2.0)? + weighted_sobolev(grid, g, w, n + 1.0)?)
}

pub fn make_initial_data(spec: &InitialDataSpec, grid: &SpatialGrid) -> Result<InitialData> {
    for p in [&spec.f, &spec.g] {
        if let Some(w) = p.width() {
            if !(w > 0.0) || w / grid.spacing() < MIN_POINTS_PER_WIDTH {
                return Err(invalid(format!(
                    "profile width {w} is not resolved by spacing {} (need {MIN_POINTS_PER_WIDTH} points per width)",
                    grid.spacing()
                )));
            }
        }
    }
    let x = grid.points();
    let sample = |p: &Profile| -> Vec<f64> { x.iter().map(|&x| p.eval(x)).collect() };
    let (mut f, mut g) = (sample(&spec.f), sample(&spec.g));
    let mut eps = weighted_data_norm(grid, &f, &g, spec.regularity)?;
    let mut out = *spec;
    if let Some(target) = spec.epsilon {
        if !(target >= 0.0) {
            return Err(invalid(format!("target ε = {target} must be nonnegative")));
        }
        if eps == 0.0 && target > 0.0 {
            return Err(invalid("cannot rescale zero data to a positive ε"));
        }
        if eps > 0.0 {
            let k = target / eps;
            out.f = spec.f.scaled(k);
            out.g = spec.g.scaled(k);
            f = sample(&out.f);
            g = sample(&out.g);
            eps = weighted_data_norm(grid, &f, &g, spec.regularity)?;
        }
    }
    Ok(InitialData { state: FieldState::new(*grid, 1.0, f, g)?, epsilon: eps, spec: out })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_data_has_zero_norm() {
        let grid = SpatialGrid::new(256, 64.0).unwrap();
        let d = make_initial_data(&InitialDataSpec::zero(), &grid).unwrap();
        assert_eq!(d.epsilon, 0.0);
        assert_eq!(d.state.t, 1.0);
    }

    #[test]
    fn unresolved_width_rejected() {
        let grid = SpatialGrid::new(64, 64.0).unwrap();
        let spec =
            InitialDataSpec { f: Profile::Gaussian { amp: 1.0, width: 1.0, center: 0.0 }, ..InitialDataSpec::zero() };
        assert!(make_initial_data(&spec, &grid).is_err());
    }

    #[test]
    fn rescales_to_target() {
        let grid = SpatialGrid::new(1024, 64.0).unwrap();
        let spec = InitialDataSpec {
            f: Profile::Gaussian { amp: 1.0, width: 1.5, center: 0.0 },
            g: Profile::Sech { amp: 0.5, width: 2.0, center: 0.0 },
            regularity: 2,
            epsilon: Some(0.03),
        };
        let d = make_initial_data(&spec, &grid).unwrap();
        assert!((d.epsilon - 0.03).abs() < 1e-6 * 0.03);
    }

    #[test]
    fn homogeneous() {
        let grid = SpatialGrid::new(512, 48.0).unwrap();
        let f: Vec<f64> = grid.points().iter().map(|x| (-x * x / 2.0).exp()).collect();
        let g: Vec<f64> = grid.points().iter().map(|x| 0.3 / x.cosh()).collect();
        let a = weighted_data_norm(&grid, &f, &g, 2).unwrap();
        let f2: Vec<f64> = f.iter().map(|v| 2.0 * v).collect();
        let g2: Vec<f64> = g.iter().map(|v| 2.0 * v).collect();
        let b = weighted_data_norm(&grid, &f2, &g2, 2).unwrap();
        assert!((b - 2.0 * a).abs() <= 1e-14 * b);
    }
}
