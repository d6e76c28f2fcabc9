//! Stability condition, rate bounds, and convergence detection.
//!
//! The sufficient condition for a.s. exponential stability of the controlled
//! system compares ϱ1²/2 against the bound
//!
//! ```text
//! φ = max_{x≥0} { −(ϱ2²/2)·x^{2β} + (α2² + α3²/2)·x² + (1 + α1²/2)·c² + 2c + 1/2 }
//! ```
//!
//! When ϱ1²/2 − φ > 0, the solution norm satisfies
//! limsup log‖X(t)‖/t ≤ −(ϱ1²/2 − φ) + ε for any sufficiently small ε in
//! (0, ϱ1²/2 − φ). This module evaluates φ in closed form, checks the
//! condition, and estimates empirical decay exponents from trajectories by
//! least squares on the trailing log-norm (a finite-horizon stand-in for the
//! limsup).
//!
//! The condition is sufficient, not necessary: configurations that fail it
//! may still converge empirically, and the sweep module records both views
//! without reconciling them.

use serde::{Deserialize, Serialize};

use crate::controller::BmcParams;
use crate::error::{Error, Result};
use crate::integrator::{least_squares_slope, Trajectory};

/// Floor applied to norms before taking logs.
const LOG_FLOOR: f64 = 1e-300;

/// Result of maximizing the φ objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiBound {
    pub phi: f64,
    /// The x ≥ 0 attaining the maximum.
    pub maximizer: f64,
}

fn validate_alphas_c(alphas: [f64; 3], c: f64) -> Result<()> {
    for (i, a) in alphas.iter().enumerate() {
        if !a.is_finite() || *a < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "alpha{} must be non-negative and finite, got {a}",
                i + 1
            )));
        }
    }
    if !c.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "c must be finite, got {c}"
        )));
    }
    Ok(())
}

/// Closed-form evaluation of the φ bound.
///
/// With A = α2² + α3²/2 and C_c = (1 + α1²/2)c² + 2c + 1/2: the objective's
/// only interior critical point solves β·ϱ2²·x^{2β−2} = 2A, so the maximizer
/// is x* = (2A/(β·ϱ2²))^{1/(2β−2)} when A > 0 and x* = 0 otherwise.
pub fn phi_bound(params: &BmcParams, alphas: [f64; 3], c: f64) -> Result<PhiBound> {
    validate_alphas_c(alphas, c)?;
    if params.rho2 == 0.0 || params.beta <= 1.0 {
        return Err(Error::UnboundedObjective(format!(
            "phi requires rho2 > 0 and beta > 1 (got rho2 = {}, beta = {})",
            params.rho2, params.beta
        )));
    }
    let [a1, a2, a3] = alphas;
    let quad = a2 * a2 + 0.5 * a3 * a3;
    let constant = (1.0 + 0.5 * a1 * a1) * c * c + 2.0 * c + 0.5;
    if quad == 0.0 {
        return Ok(PhiBound {
            phi: constant,
            maximizer: 0.0,
        });
    }
    let r2sq = params.rho2 * params.rho2;
    let x_star = (2.0 * quad / (params.beta * r2sq)).powf(1.0 / (2.0 * params.beta - 2.0));
    let phi = -0.5 * r2sq * x_star.powf(2.0 * params.beta) + quad * x_star * x_star + constant;
    if !phi.is_finite() || !x_star.is_finite() {
        return Err(Error::UnboundedObjective(format!(
            "phi evaluation overflowed (maximizer {x_star})"
        )));
    }
    Ok(PhiBound {
        phi,
        maximizer: x_star,
    })
}

/// Outcome of the stability analysis for one parameter set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub phi_bound: f64,
    /// ϱ1²/2 − φ.
    pub margin: f64,
    pub condition_holds: bool,
    /// −(ϱ1²/2 − φ) + ε; present only when the condition holds.
    pub theoretical_rate: Option<f64>,
    pub epsilon: f64,
    pub empirical_rate: Option<f64>,
    pub converge_step: Option<u64>,
}

/// Evaluates the sufficient condition ϱ1²/2 − φ > 0 and the implied rate.
///
/// `epsilon` defaults to min(0.1·margin, 1e−3) when the condition holds and
/// must lie strictly below the margin when supplied.
pub fn check_condition(
    params: &BmcParams,
    alphas: [f64; 3],
    c: f64,
    epsilon: Option<f64>,
) -> Result<StabilityReport> {
    let pb = phi_bound(params, alphas, c)?;
    let margin = 0.5 * params.rho1 * params.rho1 - pb.phi;
    let condition_holds = margin > 0.0;
    let eps = match epsilon {
        Some(e) => {
            if !e.is_finite() || e <= 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "epsilon must be positive and finite, got {e}"
                )));
            }
            if condition_holds && e >= margin {
                return Err(Error::InvalidArgument(format!(
                    "epsilon must lie in (0, margin) = (0, {margin}), got {e}"
                )));
            }
            e
        }
        None => {
            if condition_holds {
                (0.1 * margin).min(1e-3)
            } else {
                1e-3
            }
        }
    };
    Ok(StabilityReport {
        phi_bound: pb.phi,
        margin,
        condition_holds,
        theoretical_rate: condition_holds.then(|| -margin + eps),
        epsilon: eps,
        empirical_rate: None,
        converge_step: None,
    })
}

/// When a trajectory counts as converged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceCriterion {
    /// Norm threshold.
    pub tol: f64,
    /// Number of consecutive recorded points that must stay below `tol`.
    pub window: usize,
    /// Horizon in raw steps; convergence must begin at or before this step.
    pub max_steps: u64,
}

impl Default for ConvergenceCriterion {
    fn default() -> Self {
        Self {
            tol: 1e-2,
            window: 100,
            max_steps: 100_000,
        }
    }
}

impl ConvergenceCriterion {
    pub fn validate(&self) -> Result<()> {
        if !self.tol.is_finite() || self.tol <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if self.window == 0 {
            return Err(Error::InvalidArgument("window must be at least 1".into()));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidArgument(
                "max_steps must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// First recorded index at which ‖X‖ stays below `crit.tol` for
/// `crit.window` consecutive recorded points. A trajectory that terminated
/// early (blow-up) never converges. Returns an index into the recorded
/// arrays; the raw step is `traj.steps[index]`.
pub fn detect_convergence(traj: &Trajectory, crit: &ConvergenceCriterion) -> Option<usize> {
    crit.validate().ok()?;
    if traj.terminated_early.is_some() || traj.is_empty() {
        return None;
    }
    let norms: Vec<f64> = traj.norms().collect();
    let n = norms.len();
    if n < crit.window {
        return None;
    }
    let mut run = 0usize;
    for i in 0..n {
        if norms[i] < crit.tol {
            run += 1;
            if run >= crit.window {
                let start = i + 1 - crit.window;
                if traj.steps[start] <= crit.max_steps {
                    return Some(start);
                }
                return None;
            }
        } else {
            run = 0;
        }
    }
    None
}

/// Least-squares slope of log‖X(t)‖ against t over the trailing
/// `tail_fraction` of recorded points. Negative means decay per unit time.
pub fn empirical_rate(traj: &Trajectory, tail_fraction: f64) -> Result<f64> {
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "tail_fraction must lie in (0, 1], got {tail_fraction}"
        )));
    }
    let n = traj.len();
    let k = ((n as f64) * tail_fraction).floor() as usize;
    if k < 2 {
        return Err(Error::InvalidArgument(format!(
            "tail must contain at least 2 recorded points, got {k} of {n}"
        )));
    }
    let start = n - k;
    let ts = &traj.times[start..];
    let ys: Vec<f64> = traj.states[start..]
        .iter()
        .map(|s| s.norm().max(LOG_FLOOR).ln())
        .collect();
    Ok(least_squares_slope(ts, &ys))
}
