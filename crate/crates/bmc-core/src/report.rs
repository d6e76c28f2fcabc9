//! Textual output formats: CSV for tabular data, JSON for reports.
//!
//! Floats render through Rust's shortest round-trip formatting, so equal
//! inputs always produce byte-identical files.

use std::fmt::Write as _;

use crate::dynamics::FieldSample;
use crate::integrator::Trajectory;
use crate::stability::StabilityReport;
use crate::sweep::{Outcome, SweepTable};
use crate::toygan::train::TrainOutput;

/// `step,t,disc_param,gen_param,norm` per recorded state.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::with_capacity(traj.len() * 48 + 64);
    out.push_str("step,t,disc_param,gen_param,norm\n");
    for ((step, t), s) in traj.steps.iter().zip(&traj.times).zip(&traj.states) {
        let _ = writeln!(out, "{step},{t},{},{},{}", s.disc, s.gen, s.norm());
    }
    out
}

/// `x,y,dx,dy` per grid point, row-major.
pub fn field_csv(field: &[FieldSample]) -> String {
    let mut out = String::with_capacity(field.len() * 32 + 16);
    out.push_str("x,y,dx,dy\n");
    for s in field {
        let _ = writeln!(out, "{},{},{},{}", s.x, s.y, s.dx, s.dy);
    }
    out
}

/// One row per (cell, seed): outcome is `converged`, `not_converged`, or
/// `diverged`; `step` is the convergence step, the divergence step, or empty.
pub fn sweep_rows_csv(table: &SweepTable) -> String {
    let mut out = String::with_capacity(table.rows.len() * 48 + 64);
    out.push_str("rho1,rho2,beta,seed_index,seed,outcome,step\n");
    for r in &table.rows {
        let (outcome, step) = match r.outcome {
            Outcome::Converged { step } => ("converged", Some(step)),
            Outcome::NotConverged => ("not_converged", None),
            Outcome::Diverged { step } => ("diverged", Some(step)),
        };
        let _ = write!(
            out,
            "{},{},{},{},{},{outcome},",
            r.rho1, r.rho2, r.beta, r.seed_index, r.seed
        );
        match step {
            Some(s) => {
                let _ = writeln!(out, "{s}");
            }
            None => out.push('\n'),
        }
    }
    out
}

/// Per-cell aggregates as pretty-printed JSON.
pub fn sweep_aggregates_json(table: &SweepTable) -> String {
    serde_json::to_string_pretty(&table.aggregates).expect("aggregates serialize") + "\n"
}

pub fn stability_report_json(report: &StabilityReport) -> String {
    serde_json::to_string_pretty(report).expect("report serializes") + "\n"
}

/// `step,loss_d,loss_g,shifting_diff,fit_metric`; optional cells are empty
/// on steps where the quantity was not evaluated.
pub fn training_log_csv(output: &TrainOutput) -> String {
    let mut out = String::with_capacity(output.records.len() * 56 + 64);
    out.push_str("step,loss_d,loss_g,shifting_diff,fit_metric\n");
    for r in &output.records {
        let _ = write!(out, "{},{},{},", r.step, r.loss_d, r.loss_g);
        if let Some(sd) = r.shifting_diff {
            let _ = write!(out, "{sd}");
        }
        out.push(',');
        if let Some(fm) = r.fit_metric {
            let _ = write!(out, "{fm}");
        }
        out.push('\n');
    }
    out
}
