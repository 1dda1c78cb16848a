use serde::{Deserialize, Serialize};

use super::coefficients::CoefficientProfile;
use crate::error::{invalid, Error, Result};
use crate::grid_spectral::SpatialGrid;

/// Samples of (u, ∂t u) at time t.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub grid: SpatialGrid,
    pub t: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl FieldState {
    pub fn new(grid: SpatialGrid, t: f64, u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        grid.check_len(u.len())?;
        grid.check_len(v.len())?;
        if !t.is_finite() {
            return Err(Error::NonFinite("time".into()));
        }
        Ok(Self { grid, t, u, v })
    }

    pub fn zeros(grid: SpatialGrid, t: f64) -> Self {
        Self { grid, t, u: vec![0.0; grid.n()], v: vec![0.0; grid.n()] }
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().chain(&self.v).all(|x| x.is_finite())
    }

    pub fn max_abs_diff(&self, other: &FieldState) -> f64 {
        self.u.iter().zip(&other.u).chain(self.v.iter().zip(&other.v)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// Which source term drives a trajectory's field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldRole {
    /// u itself, source (β₀ + β)u³.
    Full,
    /// u₀, source β₀u³.
    Constant,
    /// u₁, source β(x)u³.
    Variable,
}

impl FieldRole {
    /// Coefficient multiplying u³ in this field's equation.
    pub fn source(&self, c: &CoefficientProfile, grid: &SpatialGrid) -> Vec<f64> {
        match self {
            FieldRole::Full => c.total(grid),
            FieldRole::Constant => vec![c.beta0; grid.n()],
            FieldRole::Variable => c.sample(grid),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FieldRole::Full => "u",
            FieldRole::Constant => "u0",
            FieldRole::Variable => "u1",
        }
    }
}

/// Time-ordered snapshots of one field, first one at t = 1.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub grid: SpatialGrid,
    pub dt: f64,
    pub dt_snap: f64,
    pub coefficients: CoefficientProfile,
    pub role: FieldRole,
    pub epsilon: Option<f64>,
    pub snapshots: Vec<FieldState>,
}

impl Trajectory {
    pub fn t_first(&self) -> f64 {
        self.snapshots.first().map_or(f64::NAN, |s| s.t)
    }

    pub fn t_last(&self) -> f64 {
        self.snapshots.last().map_or(f64::NAN, |s| s.t)
    }

    fn tol(&self) -> f64 {
        1e-9 * self.dt_snap.max(1.0)
    }

    /// Snapshot at exactly `t` (up to rounding of the cadence).
    pub fn snapshot_at(&self, t: f64) -> Result<&FieldState> {
        let i = ((t - self.t_first()) / self.dt_snap).round();
        if i >= 0.0 && (i as usize) < self.snapshots.len() {
            let s = &self.snapshots[i as usize];
            if (s.t - t).abs() <= self.tol() {
                return Ok(s);
            }
        }
        Err(invalid(format!(
            "t = {t} is not on the snapshot cadence {} of [{}, {}]",
            self.dt_snap,
            self.t_first(),
            self.t_last()
        )))
    }

    /// Index `i` with `t_i ≤ t ≤ t_{i+1}`.
    pub fn bracket(&self, t: f64) -> Result<usize> {
        let (a, b) = (self.t_first(), self.t_last());
        if !(t >= a - self.tol() && t <= b + self.tol()) || self.snapshots.len() < 2 {
            return Err(Error::OutOfRange(format!("t = {t} outside trajectory range [{a}, {b}]")));
        }
        let i = ((t - a) / self.dt_snap).floor().max(0.0) as usize;
        Ok(i.min(self.snapshots.len() - 2))
    }

    /// The coefficient multiplying u³ in this field's equation.
    pub fn source(&self) -> Vec<f64> {
        self.role.source(&self.coefficients, &self.grid)
    }
}
