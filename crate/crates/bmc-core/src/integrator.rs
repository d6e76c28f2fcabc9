//! Fixed-step Euler–Maruyama integration of
//! dX = f(X)dt + g1(X)dB1 + g2(X)dB2, with trajectory recording.
//!
//! The scheme is the explicit update
//! X_{k+1} = X_k + f(X_k)·dt + g1(X_k)·ΔB1_k + g2(X_k)·ΔB2_k with
//! ΔB ~ N(0, dt) drawn from two noise streams derived from the configured
//! seed (stream 0 for B1, stream 1 for B2). A trajectory whose norm crosses
//! `blowup_threshold` terminates early with a flag rather than an error, so
//! sweeps can record divergence as an outcome.

use serde::{Deserialize, Serialize};

use crate::controller::Controller;
use crate::dynamics::{drift, State, SystemSpec};
use crate::error::{Error, Result};
use crate::noise::NoiseStream;

pub const DEFAULT_BLOWUP_THRESHOLD: f64 = 1e12;
pub const DEFAULT_DT: f64 = 0.1;

/// Discretization parameters for one integration run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SdeConfig {
    pub dt: f64,
    pub n_steps: u64,
    pub record_stride: u64,
    pub x0: State,
    pub seed: u64,
    pub blowup_threshold: f64,
}

impl SdeConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.dt.is_finite() || self.dt <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "dt must be positive and finite, got {}",
                self.dt
            )));
        }
        if self.n_steps == 0 {
            return Err(Error::InvalidArgument("n_steps must be at least 1".into()));
        }
        if self.record_stride == 0 {
            return Err(Error::InvalidArgument(
                "record_stride must be at least 1".into(),
            ));
        }
        if !self.x0.is_finite() {
            return Err(Error::NonFiniteState {
                disc: self.x0.disc,
                gen: self.x0.gen,
            });
        }
        if !self.blowup_threshold.is_finite() || self.blowup_threshold <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "blowup_threshold must be positive and finite, got {}",
                self.blowup_threshold
            )));
        }
        Ok(())
    }
}

/// Time-stamped sequence of states from one integration run.
///
/// `times[k]` is computed as `steps[k] as f64 * dt`, an exact
/// integer-multiple product rather than a running sum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    /// Raw step index of each recorded state.
    pub steps: Vec<u64>,
    pub times: Vec<f64>,
    pub states: Vec<State>,
    pub seed: u64,
    pub dt: f64,
    pub record_stride: u64,
    /// Step index at which the norm crossed the blow-up threshold, if it did.
    pub terminated_early: Option<u64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn norms(&self) -> impl Iterator<Item = f64> + '_ {
        self.states.iter().map(|s| s.norm())
    }

    pub fn final_state(&self) -> State {
        *self.states.last().expect("trajectory is never empty")
    }
}

/// Integrates the controlled system from `cfg.x0` for `cfg.n_steps` steps.
///
/// States are recorded at step 0, every `record_stride` steps, and at the
/// final step. With a null controller (or ϱ1 = ϱ2 = 0) no noise stream is
/// consumed and the scheme reduces to deterministic explicit Euler.
pub fn integrate(spec: &SystemSpec, ctrl: &Controller, cfg: &SdeConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let mut b1 = NoiseStream::new(cfg.seed, 0);
    let mut b2 = NoiseStream::new(cfg.seed, 1);
    let noisy = !ctrl.is_null();

    let cap = (cfg.n_steps / cfg.record_stride + 2) as usize;
    let mut traj = Trajectory {
        steps: Vec::with_capacity(cap),
        times: Vec::with_capacity(cap),
        states: Vec::with_capacity(cap),
        seed: cfg.seed,
        dt: cfg.dt,
        record_stride: cfg.record_stride,
        terminated_early: None,
    };
    let record = |step: u64, x: State, traj: &mut Trajectory| {
        traj.steps.push(step);
        traj.times.push(step as f64 * cfg.dt);
        traj.states.push(x);
    };

    let mut x = cfg.x0;
    record(0, x, &mut traj);

    for k in 0..cfg.n_steps {
        let f = drift(spec, x)?;
        let (g1, g2) = ctrl.diffusion(x).map_err(|e| match e {
            Error::Overflow { .. } => Error::IntegrationDiverged {
                step: k,
                last_disc: x.disc,
                last_gen: x.gen,
            },
            other => other,
        })?;
        let (db1, db2) = if noisy {
            (b1.increment(cfg.dt)?, b2.increment(cfg.dt)?)
        } else {
            (0.0, 0.0)
        };
        let next = State::new(
            x.disc + f.disc * cfg.dt + g1.disc * db1 + g2.disc * db2,
            x.gen + f.gen * cfg.dt + g1.gen * db1 + g2.gen * db2,
        );
        if !next.is_finite() {
            return Err(Error::IntegrationDiverged {
                step: k + 1,
                last_disc: x.disc,
                last_gen: x.gen,
            });
        }
        x = next;
        let step = k + 1;
        if x.norm() > cfg.blowup_threshold {
            record(step, x, &mut traj);
            traj.terminated_early = Some(step);
            return Ok(traj);
        }
        if step % cfg.record_stride == 0 || step == cfg.n_steps {
            record(step, x, &mut traj);
        }
    }
    Ok(traj)
}

/// The scalar linear SDE dX = aX dt + bX dB with known closed-form solution,
/// used to validate the integrator's strong convergence order.
#[derive(Debug, Clone, Copy)]
pub struct LinearSde {
    pub a: f64,
    pub b: f64,
    pub x0: f64,
    pub t_end: f64,
}

/// Mean absolute endpoint errors of Euler–Maruyama against the exact solution
/// X(T) = X0·exp((a − b²/2)T + bB(T)) sharing the same noise path, one entry
/// per dt, plus the order fitted by least squares on the log-log data.
#[derive(Debug, Clone)]
pub struct StrongErrorReport {
    pub dts: Vec<f64>,
    pub mean_abs_errors: Vec<f64>,
    /// Least-squares slope of ln(error) against ln(dt). NaN when some error
    /// vanishes exactly (noise-free exact integration).
    pub fitted_order: f64,
}

pub fn strong_error(
    reference: &LinearSde,
    dt_list: &[f64],
    n_seeds: u64,
    base_seed: u64,
) -> Result<StrongErrorReport> {
    if n_seeds < 100 {
        return Err(Error::InvalidArgument(format!(
            "need at least 100 seeds, got {n_seeds}"
        )));
    }
    if dt_list.is_empty() || dt_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument(
            "dt_list must be strictly decreasing and non-empty".into(),
        ));
    }
    if dt_list.iter().any(|&dt| !dt.is_finite() || dt <= 0.0) {
        return Err(Error::InvalidArgument("dt values must be positive".into()));
    }
    if reference.t_end <= 0.0 {
        return Err(Error::InvalidArgument("t_end must be positive".into()));
    }

    let mut mean_abs_errors = Vec::with_capacity(dt_list.len());
    for (dt_idx, &dt) in dt_list.iter().enumerate() {
        let n = ((reference.t_end / dt).round() as u64).max(1);
        let t = n as f64 * dt;
        let mut total = 0.0;
        for s in 0..n_seeds {
            let mut stream =
                NoiseStream::new(crate::sweep::derive_seed(base_seed, dt_idx as u64, s), 0);
            let mut x = reference.x0;
            let mut b_end = 0.0;
            for _ in 0..n {
                let db = stream.increment(dt)?;
                x += reference.a * x * dt + reference.b * x * db;
                b_end += db;
            }
            let exact = reference.x0
                * ((reference.a - reference.b * reference.b / 2.0) * t + reference.b * b_end)
                    .exp();
            total += (x - exact).abs();
        }
        mean_abs_errors.push(total / n_seeds as f64);
    }

    let fitted_order = if mean_abs_errors.iter().any(|&e| e <= 0.0) {
        f64::NAN
    } else {
        let xs: Vec<f64> = dt_list.iter().map(|d| d.ln()).collect();
        let ys: Vec<f64> = mean_abs_errors.iter().map(|e| e.ln()).collect();
        least_squares_slope(&xs, &ys)
    };
    Ok(StrongErrorReport {
        dts: dt_list.to_vec(),
        mean_abs_errors,
        fitted_order,
    })
}

/// Ordinary least-squares slope of y against x.
pub(crate) fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    sxy / sxx
}
