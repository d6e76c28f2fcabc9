//! Synthetic target distributions for toy GAN training.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::NoiseStream;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DataSpec {
    /// One-dimensional Gaussian.
    Gauss1d { mean: f64, std: f64 },
    /// Mixture of `n_modes` Gaussians on a circle of radius `radius`.
    Ring2d { n_modes: usize, radius: f64, std: f64 },
}

impl DataSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            DataSpec::Gauss1d { mean, std } => {
                if !mean.is_finite() || !std.is_finite() || std <= 0.0 {
                    return Err(Error::InvalidArgument(format!(
                        "gauss1d requires finite mean and positive std, got ({mean}, {std})"
                    )));
                }
            }
            DataSpec::Ring2d {
                n_modes,
                radius,
                std,
            } => {
                if n_modes == 0 {
                    return Err(Error::InvalidArgument("ring2d needs n_modes >= 1".into()));
                }
                if !radius.is_finite() || !std.is_finite() || std <= 0.0 {
                    return Err(Error::InvalidArgument(format!(
                        "ring2d requires finite radius and positive std, got ({radius}, {std})"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self {
            DataSpec::Gauss1d { .. } => 1,
            DataSpec::Ring2d { .. } => 2,
        }
    }

    /// Appends `n` samples (row-major) drawn from the distribution.
    pub fn sample_into(&self, stream: &mut NoiseStream, n: usize, out: &mut Vec<f64>) {
        match *self {
            DataSpec::Gauss1d { mean, std } => {
                for _ in 0..n {
                    out.push(mean + std * stream.normal());
                }
            }
            DataSpec::Ring2d {
                n_modes,
                radius,
                std,
            } => {
                for _ in 0..n {
                    let mode = (stream.uniform() * n_modes as f64) as usize % n_modes;
                    let angle = std::f64::consts::TAU * mode as f64 / n_modes as f64;
                    out.push(radius * angle.cos() + std * stream.normal());
                    out.push(radius * angle.sin() + std * stream.normal());
                }
            }
        }
    }
}
