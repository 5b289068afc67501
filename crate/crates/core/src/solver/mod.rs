//! Finite-difference solver for `-ΔΦ - 2Φ³ = ΛΦ` on a metric graph.
//!
//! Every edge carries a uniform grid.  Interior rows use the three-point
//! second difference with Numerov mass weights (or trapezoid weights with
//! [`Scheme::Lumped`]); a vertex row balances the fluxes `(Φ_v - Φ_1)/h_e`
//! of its incident edges, which is the Kirchhoff condition integrated over
//! the half cells around the vertex.  Half-lines are cut at `30/μ` with the
//! transparent condition `Φ' = -μΦ`.

mod continuation;
mod discretize;
mod iterate;
pub mod linalg;
mod seed;
mod state;
mod validate;

pub use continuation::{
    continue_branch, solve_state, sweep_lambda, ArclengthOptions, Branch, BranchPoint, Termination,
};
pub use discretize::{Discretization, DiscretizationOptions, EdgeGrid, Scheme};
pub use iterate::{
    newton_refine, newton_solve, petviashvili, NewtonOptions, NewtonOutcome, PetviashviliOptions,
};
pub use seed::{constant_seed, seed_from_prediction};
pub use state::{
    edge_derivative, edge_masses, energy, energy_from_identity, localization_ratio, mass,
    StationaryState,
};
pub use validate::{validate_state, StateReport, StateViolation};
