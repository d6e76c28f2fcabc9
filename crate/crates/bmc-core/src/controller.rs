//! Brownian motion controller diffusion coefficients, plus a null baseline.
//!
//! The controller adds state-multiplicative noise
//! u(t) = ϱ1·X·Ḃ1 + ϱ2·‖X‖^β·X·Ḃ2 to the drift. Both B1 and B2 are scalar
//! Brownian motions shared across the two state coordinates — one ΔB1 and one
//! ΔB2 per step — and ‖X‖ is the Euclidean norm even for non-integer β.
//! The controller vanishes at the origin, so the equilibrium of the
//! uncontrolled system is preserved exactly.

use serde::{Deserialize, Serialize};

use crate::dynamics::State;
use crate::error::{Error, Result};

/// Controller coefficients (ϱ1, ϱ2, β).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BmcParams {
    pub rho1: f64,
    pub rho2: f64,
    pub beta: f64,
}

impl BmcParams {
    pub fn new(rho1: f64, rho2: f64, beta: f64) -> Result<Self> {
        if !rho1.is_finite() || rho1 < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "rho1 must be a non-negative finite number, got {rho1}"
            )));
        }
        if !rho2.is_finite() || rho2 < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "rho2 must be a non-negative finite number, got {rho2}"
            )));
        }
        if !beta.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "beta must be finite, got {beta}"
            )));
        }
        Ok(Self { rho1, rho2, beta })
    }

    /// Hypothesis under which a unique global solution is guaranteed:
    /// ϱ2 > 0 and β > 1. Relaxed configurations are still integrable for
    /// ablation; they just carry no guarantee.
    pub fn guarantees_global_solution(&self) -> bool {
        self.rho2 > 0.0 && self.beta > 1.0
    }

    pub fn is_null(&self) -> bool {
        self.rho1 == 0.0 && self.rho2 == 0.0
    }
}

/// Either the BMC or the uncontrolled baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Controller {
    Null,
    Bmc(BmcParams),
}

impl Controller {
    /// Diffusion coefficient vectors (g1, g2) at `x`:
    /// g1 = ϱ1·x and g2 = ϱ2·‖x‖^β·x.
    pub fn diffusion(&self, x: State) -> Result<(State, State)> {
        if !x.is_finite() {
            return Err(Error::NonFiniteState {
                disc: x.disc,
                gen: x.gen,
            });
        }
        match self {
            Controller::Null => Ok((State::ZERO, State::ZERO)),
            Controller::Bmc(p) => {
                let g1 = x.scale(p.rho1);
                if !g1.is_finite() {
                    return Err(Error::Overflow { term: "rho1 * x" });
                }
                let g2 = if x.disc == 0.0 && x.gen == 0.0 {
                    // powf(0, beta) would be +inf for negative beta.
                    State::ZERO
                } else {
                    let amp = p.rho2 * x.norm().powf(p.beta);
                    let g2 = x.scale(amp);
                    if !g2.is_finite() {
                        return Err(Error::Overflow {
                            term: "rho2 * |x|^beta * x",
                        });
                    }
                    g2
                };
                Ok((g1, g2))
            }
        }
    }

    /// True when the controller contributes no noise at all.
    pub fn is_null(&self) -> bool {
        match self {
            Controller::Null => true,
            Controller::Bmc(p) => p.is_null(),
        }
    }
}
