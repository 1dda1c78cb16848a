use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::grid_spectral::{apply_multiplier, forward_transform, inverse_transform, japanese, Spectrum};
use crate::nlkg_solver::FieldState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinearFlowKind {
    /// e^{+it⟨∇⟩}
    HalfPlus,
    /// e^{−it⟨∇⟩}
    HalfMinus,
    /// cos(t⟨∇⟩)
    CosFlow,
    /// sin(t⟨∇⟩)/⟨∇⟩
    SincFlow,
}

impl LinearFlowKind {
    pub fn symbol(&self, t: f64, xi: f64) -> Complex64 {
        let w = japanese(xi);
        match self {
            LinearFlowKind::HalfPlus => Complex64::from_polar(1.0, t * w),
            LinearFlowKind::HalfMinus => Complex64::from_polar(1.0, -t * w),
            LinearFlowKind::CosFlow => Complex64::new((t * w).cos(), 0.0),
            LinearFlowKind::SincFlow => Complex64::new((t * w).sin() / w, 0.0),
        }
    }
}

/// Applies the exact Fourier multiplier of `kind` at time `t`.
pub fn linear_flow(s: &Spectrum, t: f64, kind: LinearFlowKind) -> Result<Spectrum> {
    apply_multiplier(s, |xi| kind.symbol(t, xi))
}

/// Free Klein-Gordon evolution of (u, ∂t u) by time `t`:
/// u ← cos(t⟨∇⟩)u + sin(t⟨∇⟩)/⟨∇⟩ v, v ← −⟨∇⟩ sin(t⟨∇⟩)u + cos(t⟨∇⟩)v.
pub fn free_flow(state: &FieldState, t: f64) -> Result<FieldState> {
    let grid = &state.grid;
    let uh = forward_transform(grid, &state.u)?;
    let vh = forward_transform(grid, &state.v)?;
    let mut un = uh.clone();
    let mut vn = vh.clone();
    for j in 0..grid.n() {
        let w = japanese(grid.wavenumber(j));
        let (s, c) = (t * w).sin_cos();
        un.coeffs[j] = c * uh.coeffs[j] + (s / w) * vh.coeffs[j];
        vn.coeffs[j] = -w * s * uh.coeffs[j] + c * vh.coeffs[j];
    }
    FieldState::new(*grid, state.t + t, inverse_transform(&un), inverse_transform(&vn))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_spectral::SpatialGrid;

    #[test]
    fn zero_time_is_identity() {
        let grid = SpatialGrid::new(128, 30.0).unwrap();
        let f: Vec<f64> = grid.points().iter().map(|x| (-x * x).exp()).collect();
        let s = forward_transform(&grid, &f).unwrap();
        for k in [LinearFlowKind::HalfPlus, LinearFlowKind::HalfMinus, LinearFlowKind::CosFlow] {
            assert_eq!(linear_flow(&s, 0.0, k).unwrap(), s);
        }
    }

    #[test]
    fn dc_mode_phase() {
        let grid = SpatialGrid::new(64, 30.0).unwrap();
        let s = forward_transform(&grid, &vec![1.0; 64]).unwrap();
        let out = linear_flow(&s, std::f64::consts::PI, LinearFlowKind::HalfPlus).unwrap();
        assert!((out.coeffs[0] + s.coeffs[0]).norm() < 1e-12);
    }

    #[test]
    fn half_flows_combine() {
        let grid = SpatialGrid::new(128, 30.0).unwrap();
        let f: Vec<f64> = grid.points().iter().map(|x| x * (-x * x / 3.0).exp()).collect();
        let s = forward_transform(&grid, &f).unwrap();
        let t = 2.7;
        let p = linear_flow(&s, t, LinearFlowKind::HalfPlus).unwrap();
        let m = linear_flow(&s, t, LinearFlowKind::HalfMinus).unwrap();
        let c = linear_flow(&s, t, LinearFlowKind::CosFlow).unwrap();
        let sn = linear_flow(&s, t, LinearFlowKind::SincFlow).unwrap();
        for j in 0..128 {
            let w = japanese(grid.wavenumber(j));
            assert!(((p.coeffs[j] + m.coeffs[j]) * 0.5 - c.coeffs[j]).norm() < 1e-14);
            let sinc = (p.coeffs[j] - m.coeffs[j]) / Complex64::new(0.0, 2.0 * w);
            assert!((sinc - sn.coeffs[j]).norm() < 1e-14);
        }
    }
}
