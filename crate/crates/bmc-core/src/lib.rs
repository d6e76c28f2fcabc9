//! Simulation and analysis toolkit for noise-controlled GAN training
//! dynamics.
//!
//! The crate treats two-player training as a dynamical system
//! dX = f(X)dt and stabilizes it with a state-multiplicative Brownian
//! motion controller u(t) = ϱ1·X·Ḃ1 + ϱ2·‖X‖^β·X·Ḃ2. It provides:
//!
//! - [`dynamics`]: the 2-D point-mass-GAN drift field for linear and
//!   log-sigmoid objective families;
//! - [`controller`]: the controller's diffusion coefficients;
//! - [`integrator`]: fixed-step Euler–Maruyama integration with trajectory
//!   recording and strong-order validation against a closed-form linear SDE;
//! - [`stability`]: the closed-form stability bound, condition check, rate
//!   bound, and empirical rate estimation;
//! - [`sweep`]: deterministic seed-parallel grid experiments over
//!   (ϱ1, ϱ2, β);
//! - [`toygan`]: a small dense GAN trained with the noise-regularized
//!   objectives, with shifting-difference and energy-distance metrics;
//! - [`noise`]: counter-based, exactly reproducible Gaussian increment
//!   streams;
//! - [`report`]: deterministic CSV/JSON output formats.
//!
//! Everything downstream of a seed is bit-reproducible, including across
//! worker-thread counts.

pub mod controller;
pub mod dynamics;
pub mod error;
pub mod integrator;
pub mod noise;
pub mod report;
pub mod stability;
pub mod sweep;
pub mod toygan;

pub use controller::{BmcParams, Controller};
pub use dynamics::{FieldSample, HFamily, HKind, State, SystemSpec};
pub use error::{Error, Result};
pub use integrator::{integrate, strong_error, LinearSde, SdeConfig, StrongErrorReport, Trajectory};
pub use noise::NoiseStream;
pub use stability::{
    check_condition, detect_convergence, empirical_rate, phi_bound, ConvergenceCriterion,
    PhiBound, StabilityReport,
};
pub use sweep::{
    derive_seed, ordering_report, run_sweep, CellAggregate, OrderingViolation, Outcome, SweepGrid,
    SweepRow, SweepTable,
};
