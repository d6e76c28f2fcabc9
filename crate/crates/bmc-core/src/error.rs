//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by simulation, analysis, and training routines.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A caller-supplied argument failed validation.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A state vector contained NaN or infinity where a finite value is required.
    #[error("non-finite state: ({disc}, {gen})")]
    NonFiniteState { disc: f64, gen: f64 },

    /// A diffusion coefficient overflowed; `term` names the offending factor.
    #[error("overflow in controller term `{term}`")]
    Overflow { term: &'static str },

    /// The maximized expression defining the stability bound has no finite maximum.
    #[error("unbounded objective: {0}")]
    UnboundedObjective(String),

    /// The integrator produced a non-finite state. Carries the last finite
    /// state and the step at which it was observed.
    #[error("integration diverged at step {step}; last finite state ({last_disc}, {last_gen})")]
    IntegrationDiverged {
        step: u64,
        last_disc: f64,
        last_gen: f64,
    },

    /// GAN training produced a non-finite loss.
    #[error("training diverged at step {step}")]
    TrainingDiverged { step: u64 },

    /// Two snapshots do not share the same evaluation latent batch.
    #[error("snapshots were taken against different latent batches")]
    MismatchedLatents,

    /// A batch or parameter vector has the wrong length.
    #[error("shape mismatch: expected {expected}, got {actual}")]
    ShapeMismatch { expected: usize, actual: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
