//! Hyperbolic coordinates, hyperboloid sampling, the profile w = t^{1/2}u,
//! Lorentz boosts and the interior/exterior energy functionals.

mod coords;
mod energy;
mod exterior;
mod jets;
mod residual;
mod slice;

pub use coords::{from_hyperbolic, to_hyperbolic};
pub use energy::{
    boosted_jet, coercive_integrand, energy_report, interior_energy, interior_energy_functional,
    interior_energy_samples, interior_integrand, EnergyField, EnergyReport, InteriorEnergy, TRUNCATION_TOL,
};
pub use exterior::{
    exterior_decay_check, exterior_energy, exterior_energy_series, exterior_weight, ExteriorDecay, ExteriorReport,
    ExteriorSupTracker,
};
pub use jets::{eval_between, time_stack, truncate_jet, JetField, NodeJets, PointJet, TimeInterp, TimeStack};
pub use residual::{hyperbolic_residual, HyperbolicResidual, MAX_RESIDUAL_SPACING};
pub use slice::{
    hyperboloid_points, lorentz_boost, sample_hyperboloid, HyperbolicSlice, HyperboloidRecorder, SliceFields,
    SliceRequest, MAX_SAMPLING_CADENCE,
};
