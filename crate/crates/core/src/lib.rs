//! Two-species population models that become linear under `X = 1/x`,
//! `Y = 1/y`, and scalar periodic equations analysed through the same
//! reciprocal substitution.
//!
//! - [`model`]: the six-coefficient model family and its linearization
//! - [`ode`]: adaptive Dormand-Prince integrator with dense output and events
//! - [`predator_prey`]: closed-form orbits, periodic vs. blow-up classification
//! - [`competing`]: rest point, eigen-structure and outcome prediction
//! - [`floquet`]: monodromy matrix, multipliers and the forced periodic solution
//! - [`abel`]: Poincare maps and periodic-solution counting for `x' = f(t, x)`

// `!(a < b)` is used throughout as the NaN-rejecting comparison
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod abel;
pub mod competing;
pub mod error;
pub mod floquet;
pub mod model;
pub mod ode;
pub mod par;
pub mod predator_prey;

pub use error::{Error, Result};
pub use model::{GeneralModel, LinearSystem2D, PeriodicFunction, PopulationState, ReciprocalState};
pub use ode::{IntegratorConfig, Trajectory};
pub use par::Execution;

/// Population species of a two-species model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Species {
    X,
    Y,
}

impl Species {
    pub fn other(self) -> Self {
        match self {
            Species::X => Species::Y,
            Species::Y => Species::X,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Species::X => "x",
            Species::Y => "y",
        }
    }
}
