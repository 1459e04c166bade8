//! Error types shared by the simulation core.
//!
//! Every fallible operation in the core returns [`ModelError`]; scenario
//! parsing/validation and the engine wrap it with more context (see
//! [`crate::scenario::ScenarioError`] and [`crate::engine::EngineError`]).

use thiserror::Error;

/// Errors raised by grid construction, field algebra, and the model updates.
#[derive(Debug, Error)]
pub enum ModelError {
    /// The lattice is too coarse to carry the 5-point stencil.
    #[error("nx must be >= 4 (got {nx})")]
    GridTooCoarse { nx: u32 },

    /// The disk radius was zero, negative, or not finite.
    #[error("radius must be positive and finite (got {radius})")]
    BadRadius { radius: f64 },

    /// Two fields from different grids were combined.
    #[error("fields belong to different grids (structural ids {left:#018x} vs {right:#018x})")]
    GridMismatch { left: u64, right: u64 },

    /// A raw value buffer does not match the grid's interior cell count.
    #[error("field has {got} values but the grid has {expected} interior cells")]
    FieldLengthMismatch { expected: usize, got: usize },

    /// A value that must be non-negative (density, rate) was negative or NaN.
    #[error("{what} must be non-negative everywhere: cell {cell} holds {value}")]
    NegativeValue {
        what: &'static str,
        cell: usize,
        value: f64,
    },

    /// A scalar parameter failed validation; the message names the violated
    /// constraint (e.g. "beta1+beta2+beta3 must equal 1").
    #[error("{0}")]
    InvalidParameter(String),

    /// Both P0 and E are identically zero, so the employment attractor's
    /// normalization is undefined.
    #[error("attractor normalization undefined: integrate(P0) + alpha*integrate(E) must be > 0")]
    ZeroAttractorMass,

    /// A commute step was asked to relax by more than one full step.
    #[error("commute substep is not a convex combination: dt*(tm+te) = {weight} > 1")]
    ConvexityViolated { weight: f64 },

    /// The day must split into an even number of substeps so midday falls on
    /// a substep boundary.
    #[error("substeps per day must be even and >= 2 (got {substeps})")]
    BadSubstepCount { substeps: u32 },

    /// An efficiency field left the unit interval.
    #[error("efficiency must lie in [0,1]: cell {cell} holds {value}")]
    EfficiencyOutOfRange { cell: usize, value: f64 },

    /// An explicit diffusion step would violate its stability bound.
    #[error("explicit diffusion unstable: nu*dt/h^2 = {ratio} exceeds {limit}")]
    DiffusionUnstable { ratio: f64, limit: f64 },
}
