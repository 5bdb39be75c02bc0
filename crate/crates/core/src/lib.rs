//! Ground states of the linearly coupled Kirchhoff–Choquard system on a
//! periodic box in three dimensions.
//!
//! The energy, the Nehari–Pohozaev functional and the Pohozaev functional all
//! factor through nine scalar integrals (a [`Breakdown`]); the dilation
//! `w^t(x) = t w(x / t^2)` acts on those scalars by powers of `t`, which turns
//! the manifold projection into a scalar root-finding problem.

pub mod cli;
pub mod constants;
pub mod error;
pub mod fiber;
pub mod functionals;
pub mod minimizer;
pub mod model;
pub mod oracle;
mod optim;
#[cfg(test)]
mod properties;
pub mod scaling;
pub mod spectral;

pub use error::{Error, Result};
pub use fiber::{project_to_manifold, scale_breakdown, solve_fiber_max, FiberPolynomial};
pub use minimizer::{minimize_ground_state, GroundStateResult, SolverConfig};
pub use functionals::{energy, np_functional, pohozaev, Breakdown, Evaluator};
pub use model::{riesz_normalization, validate_params, Exponent, ExponentRegime, ModelParams};
pub use spectral::{Field, FieldPair, Grid, RieszOperator};
