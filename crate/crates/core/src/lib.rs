//! A finite-volume laboratory for the Dirichlet problem
//!
//! ```text
//! −Δu + V u = μ  in Ω,     u = 0  on ∂Ω,
//! ```
//!
//! with a finite measure μ and a nonnegative, possibly singular potential V.
//! It extracts normal derivatives on ∂Ω (inward normal convention), builds
//! the duality kernels P_a by one adjoint solve per boundary point, and runs
//! numerical checks of the representation formula ∂u/∂n(a) = ∫ P_a dμ, the
//! L¹ estimates, the monotone truncation limits and the Hopf lemma.

pub mod cli;
pub mod config;
pub mod domain;
pub mod field;
pub mod kernel;
pub mod measure;
pub mod operator;
pub mod potential;
pub mod quadrature;
pub mod trace;
pub mod verify;

use serde::Serialize;
use thiserror::Error;

pub use domain::{Domain, DomainKind, DomainSpec, Point};
pub use field::Field;
pub use measure::{Density, Measure};
pub use operator::{Schedule, SolverOptions};
pub use potential::Potential;
pub use trace::{BoundaryTrace, TraceOrder};

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Domain(#[from] domain::DomainError),
    #[error(transparent)]
    Measure(#[from] measure::MeasureError),
    #[error(transparent)]
    Potential(#[from] potential::PotentialError),
    #[error(transparent)]
    Operator(#[from] operator::OperatorError),
    #[error(transparent)]
    Trace(#[from] trace::TraceError),
    #[error(transparent)]
    Config(#[from] config::ConfigError),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Numerical settings shared by kernels and checks.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Settings {
    pub solver: SolverOptions,
    pub schedule: Schedule,
    pub order: TraceOrder,
}
