//! Simulation and long-time analytics for one-dimensional discrete-time
//! quantum walks driven by an arbitrary SU(2) coin.
//!
//! The crate is split the same way the computation is:
//!
//! * [`model`]: coins, Bloch-sphere qubits, initial position profiles and
//!   the lattice [`WalkState`](model::WalkState).
//! * [`evolution`]: the amplitude recurrences that advance a walk one step.
//! * [`observables`]: probability distributions, moments, side ratios and
//!   ensemble averages over grids of initial qubits.
//! * [`numerics`]: adaptive quadrature over the Brillouin zone and the
//!   quadratic least-squares fit used to extract ballistic coefficients.
//! * [`analytic`]: the k-space eigen-system, the spectral integral `I(δ)`
//!   and the closed-form long-time variance laws.

pub mod analytic;
pub mod evolution;
pub mod model;
pub mod numerics;
pub mod observables;

pub use num_complex::Complex64;

use thiserror::Error;

/// Crate-level error, wrapping the per-module failures.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] model::ModelError),
    #[error(transparent)]
    Walk(#[from] evolution::WalkError),
    #[error(transparent)]
    Observable(#[from] observables::ObservableError),
    #[error(transparent)]
    Quadrature(#[from] numerics::QuadratureError),
    #[error(transparent)]
    Fit(#[from] numerics::FitError),
    #[error(transparent)]
    Analytic(#[from] analytic::AnalyticError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
