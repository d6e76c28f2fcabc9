//! Desk-scale neural GAN trained with the noise-regularized simultaneous
//! SGD update, plus the drift and fit metrics used to compare runs.

pub mod data;
pub mod metrics;
pub mod mlp;
pub mod train;

pub use data::DataSpec;
pub use metrics::{energy_distance, fit_metric, shifting_difference, tail_mean_shifting_difference};
pub use mlp::{Activation, BatchCache, MlpSpec};
pub use train::{
    disc_gradients, disc_objective, gen_gradients, gen_objective, train, EvalLatents,
    GanTrainConfig, PlayerGradients, Snapshot, ToyGan, TrainOutput, TrainRecord,
};
