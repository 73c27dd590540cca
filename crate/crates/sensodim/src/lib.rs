//! Model-free estimation of the dimension of geometrical space from a
//! simulated agent's sensorimotor flow.
//!
//! The crate simulates a two-eyed head surrounded by punctual light sources,
//! estimates the intrinsic dimension of the resulting sensory variations
//! with a linear (singular-value ratio) and a nonlinear (curvilinear
//! component analysis) method, reshapes explorations with an active
//! unstretching bootstrap, and orchestrates Monte-Carlo amplitude sweeps
//! over all of it.

pub mod bootstrap;
pub mod cca;
pub mod estimators;
pub mod geometry;
pub mod harness;
pub mod rng;
pub mod sim;
pub mod variation;

pub use cca::{cca_cost, cca_project, estimate_dim_cca, CcaParams, CostProfile, Projection};
pub use estimators::{
    displacement_dim, estimate_dim_linear, singular_spectrum, DimensionEstimate, Method,
    SingularSpectrum,
};
pub use sim::{
    build_system, sample_configurations, sense, Configuration, ExplorationMode, SensoryVector,
    System, SystemSpec,
};
pub use variation::{explore, VariationMatrix};
