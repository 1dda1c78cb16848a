//! Time integration of (∂t² − ∂x² + 1)u = β₀u³ + β(x)u³ from data at t = 1,
//! the u₀/u₁ source decomposition, the Hamiltonian and weighted bulk norms.

mod coefficients;
mod data;
mod engine;
mod io;
mod norms;
mod state;

pub use coefficients::{BetaFamily, CoefficientProfile};
pub use data::{data_support, make_initial_data, weighted_data_norm, InitialData, InitialDataSpec, Profile};
pub use engine::{
    check_wrap, evolve, evolve_decomposed, run, step_strang, Component, EvolveParams, Simulation, StepObserver,
    StepView, Stepper, TrajectoryRecorder,
};
pub use io::{read_snapshot_csv, write_trajectory, SnapshotManifest};
pub use norms::{bulk_growth_norms, bulk_growth_norms_state, hamiltonian, weighted_u1_norms, weighted_u1_norms_state};
pub use state::{FieldRole, FieldState, Trajectory};
