use serde::{Deserialize, Serialize};

use super::jets::PointJet;
use super::slice::{sample_hyperboloid, HyperbolicSlice, SliceFields};
use crate::error::{invalid, Error, Result};
use crate::grid_spectral::SpatialGrid;
use crate::nlkg_solver::Trajectory;
use crate::par::Exec;

/// Default bound on the share of the integrand mass at the y-window edges.
pub const TRUNCATION_TOL: f64 = 1e-8;

/// (∂tφ)² + (∂xφ)² + 2(∂tφ)(∂xφ)(x/t) + φ².
pub fn interior_integrand(t: f64, x: f64, phi: f64, phi_t: f64, phi_x: f64) -> f64 {
    phi_t * phi_t + phi_x * phi_x + 2.0 * phi_t * phi_x * (x / t) + phi * phi
}

/// (∂xφ + (x/t)∂tφ)² + (∂tφ)²ρ²/t² + φ², equal to [`interior_integrand`].
pub fn coercive_integrand(t: f64, x: f64, phi: f64, phi_t: f64, phi_x: f64) -> f64 {
    let r = x / t;
    let a = phi_x + r * phi_t;
    a * a + phi_t * phi_t * (1.0 - r) * (1.0 + r) + phi * phi
}

/// E_int,ρ(φ) in its defining and coercive forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InteriorEnergy {
    pub value: f64,
    pub coercive: f64,
    /// Integrand mass near the window edges relative to the total.
    pub edge_fraction: f64,
}

/// Quadrature of the interior integrand over H_ρ, parametrised by y with dx = ρ cosh y dy.
pub fn interior_energy_samples(
    rho: f64,
    ygrid: &SpatialGrid,
    phi: &[f64],
    phi_t: &[f64],
    phi_x: &[f64],
    truncation_tol: f64,
) -> Result<InteriorEnergy> {
    for len in [phi.len(), phi_t.len(), phi_x.len()] {
        ygrid.check_len(len)?;
    }
    let dy = ygrid.spacing();
    let (mut e, mut c) = (0.0, 0.0);
    let mut dens = Vec::with_capacity(ygrid.n());
    for (i, y) in ygrid.points().into_iter().enumerate() {
        let (t, x) = (rho * y.cosh(), rho * y.sinh());
        let jac = rho * y.cosh();
        let d = interior_integrand(t, x, phi[i], phi_t[i], phi_x[i]) * jac;
        dens.push(d);
        e += d;
        c += coercive_integrand(t, x, phi[i], phi_t[i], phi_x[i]) * jac;
    }
    e *= dy;
    c *= dy;
    let n = dens.len();
    let edge = dens[0].abs().max(dens[n - 1].abs()) * ygrid.length();
    let edge_fraction = if e > 0.0 { edge / e } else { 0.0 };
    if edge_fraction > truncation_tol {
        return Err(Error::OutOfRange(format!(
            "interior energy at ρ = {rho}: edge mass fraction {edge_fraction:e} exceeds {truncation_tol:e}; widen the y-window"
        )));
    }
    Ok(InteriorEnergy { value: e, coercive: c, edge_fraction })
}

/// Field whose interior energy is taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnergyField {
    U,
    /// Z u_ℓ for field index ℓ of the slice jets.
    Zu(usize),
}

/// (φ, ∂tφ, ∂xφ) for Z u_ℓ = t ∂x u_ℓ + x ∂t u_ℓ from a point jet.
pub fn boosted_jet(j: &PointJet, l: usize) -> (f64, f64, f64) {
    let (t, x) = (j.t, j.x);
    let phi = t * j.get(l, 0, 1) + x * j.get(l, 1, 0);
    let phi_t = j.get(l, 0, 1) + t * j.get(l, 1, 1) + x * j.get(l, 2, 0);
    let phi_x = t * j.get(l, 0, 2) + j.get(l, 1, 0) + x * j.get(l, 1, 1);
    (phi, phi_t, phi_x)
}

pub fn interior_energy(slice: &HyperbolicSlice, which: EnergyField, truncation_tol: f64) -> Result<InteriorEnergy> {
    match which {
        EnergyField::U => {
            interior_energy_samples(slice.rho, &slice.ygrid, &slice.u, &slice.ut, &slice.ux, truncation_tol)
        }
        EnergyField::Zu(l) => {
            let jets =
                slice.jets.as_ref().ok_or_else(|| invalid("slice was sampled without jets; use SliceFields::Full"))?;
            if jets.first().is_some_and(|j| l >= j.fields || j.a_max < 2 || j.b_max < 2) {
                return Err(invalid(format!("slice jets cannot provide Z u_{l}")));
            }
            let n = jets.len();
            let (mut p, mut pt, mut px) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
            for j in jets {
                let (a, b, c) = boosted_jet(j, l);
                p.push(a);
                pt.push(b);
                px.push(c);
            }
            interior_energy_samples(slice.rho, &slice.ygrid, &p, &pt, &px, truncation_tol)
        }
    }
}

/// ℰ_int(ρ) = E_int,ρ(u) + E_int,ρ(Z u₀) + E_int,ρ(Z u₁).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub rho: f64,
    pub e_int_u: f64,
    pub e_int_zu0: f64,
    pub e_int_zu1: f64,
    pub script_e: f64,
}

impl EnergyReport {
    pub const CSV_HEADER: &'static str = "rho,E_int_u,E_int_Zu0,E_int_Zu1,script_E";

    pub fn csv_row(&self) -> String {
        format!(
            "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
            self.rho, self.e_int_u, self.e_int_zu0, self.e_int_zu1, self.script_e
        )
    }
}

/// ℰ_int(ρ) from a slice sampled from the decomposed run (two fields, full jets).
///
/// The truncation check applies to the summed integrand: a component many
/// orders below ℰ_int may have relatively heavy tails without affecting it.
pub fn energy_report(slice: &HyperbolicSlice, truncation_tol: f64) -> Result<EnergyReport> {
    let parts =
        [EnergyField::U, EnergyField::Zu(0), EnergyField::Zu(1)].map(|f| interior_energy(slice, f, f64::INFINITY));
    let [e_u, e0, e1] = parts;
    let (e_u, e0, e1) = (e_u?, e0?, e1?);
    let total = e_u.value + e0.value + e1.value;
    let edge = [e_u, e0, e1].iter().map(|e| e.edge_fraction * e.value).sum::<f64>();
    let fraction = if total > 0.0 { edge / total } else { 0.0 };
    if fraction > truncation_tol {
        return Err(Error::OutOfRange(format!(
            "interior energy at ρ = {}: edge mass fraction {fraction:e} exceeds {truncation_tol:e}; widen the y-window",
            slice.rho
        )));
    }
    Ok(EnergyReport { rho: slice.rho, e_int_u: e_u.value, e_int_zu0: e0.value, e_int_zu1: e1.value, script_e: total })
}

/// ℰ_int(ρ) from stored u₀ and u₁ trajectories.
pub fn interior_energy_functional(
    traj_u0: &Trajectory,
    traj_u1: &Trajectory,
    rho: f64,
    ygrid: &SpatialGrid,
    exec: Exec,
) -> Result<EnergyReport> {
    let s = sample_hyperboloid(&[traj_u0, traj_u1], rho, ygrid, SliceFields::Full, exec)?;
    energy_report(&s, TRUNCATION_TOL)
}
