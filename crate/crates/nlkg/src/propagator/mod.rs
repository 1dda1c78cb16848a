//! Exact linear Klein-Gordon flows and weighted operator norms of the
//! propagator e^{±it⟨∇⟩}.

mod decay;
mod flow;
mod opnorm;

pub use decay::{decay_table, DecayRow, DecayTable};
pub use flow::{free_flow, linear_flow, LinearFlowKind};
pub use opnorm::{
    sweep_grid, weighted_operator_norm, weighted_operator_norm_with, Derivative, InputNorm, OperatorNorm,
    PowerIteration, Sign, WeightedOperator, WeightedOperatorSpec,
};
