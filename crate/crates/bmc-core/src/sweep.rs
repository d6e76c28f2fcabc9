//! Grid experiments over (ϱ1, ϱ2, β) × seeds.
//!
//! Every (cell, seed) pair integrates one trajectory and classifies it as
//! converged, not converged, or diverged. Per-trajectory seeds derive from
//! `(base_seed, cell index, seed index)` through a fixed mixing function, so
//! results are bit-identical across runs and worker-thread counts, and
//! growing `n_seeds` never changes rows already produced for earlier seed
//! indices.
//!
//! Reported step counts are raw integrator steps under this crate's
//! discretization. They are comparable across cells of one sweep, but not to
//! iteration counts produced by other discretizations or optimizers.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::controller::{BmcParams, Controller};
use crate::dynamics::SystemSpec;
use crate::error::{Error, Result};
use crate::integrator::{integrate, SdeConfig};
use crate::noise::{mix64, GOLDEN_GAMMA};
use crate::stability::{detect_convergence, ConvergenceCriterion};

/// Stable seed derivation: `base ⊕ mix(cell, index)`.
///
/// The mix is splitmix64-style avalanche over the pair, fixed for the life of
/// the crate; changing it would renumber every sweep.
pub fn derive_seed(base_seed: u64, cell_index: u64, seed_index: u64) -> u64 {
    base_seed
        ^ mix64(
            mix64(cell_index.wrapping_add(GOLDEN_GAMMA))
                .wrapping_add(seed_index.wrapping_mul(GOLDEN_GAMMA)),
        )
}

/// Axes and per-cell replication of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub rho1_values: Vec<f64>,
    pub rho2_values: Vec<f64>,
    pub beta_values: Vec<f64>,
    pub n_seeds: u64,
    pub base_seed: u64,
    /// Template for dt, x0, record_stride, and blow-up threshold. Its
    /// `n_steps` and `seed` fields are ignored: each trajectory runs for
    /// `criterion.max_steps` steps under a derived seed.
    pub sde: SdeConfig,
    pub criterion: ConvergenceCriterion,
}

impl SweepGrid {
    pub fn validate(&self) -> Result<()> {
        if self.rho1_values.is_empty() || self.rho2_values.is_empty() || self.beta_values.is_empty()
        {
            return Err(Error::InvalidArgument(
                "sweep axes must all be non-empty".into(),
            ));
        }
        if self.n_seeds == 0 {
            return Err(Error::InvalidArgument("n_seeds must be at least 1".into()));
        }
        self.criterion.validate()?;
        let mut probe = self.sde;
        probe.n_steps = self.criterion.max_steps;
        probe.validate()?;
        for &r1 in &self.rho1_values {
            for &r2 in &self.rho2_values {
                for &b in &self.beta_values {
                    BmcParams::new(r1, r2, b)?;
                }
            }
        }
        Ok(())
    }

    pub fn n_cells(&self) -> u64 {
        (self.beta_values.len() * self.rho1_values.len() * self.rho2_values.len()) as u64
    }

    /// Cell parameters by linear index, ordered (β outer, ϱ1, ϱ2 inner).
    pub fn cell(&self, index: u64) -> BmcParams {
        let n_r2 = self.rho2_values.len() as u64;
        let n_r1 = self.rho1_values.len() as u64;
        let r2 = self.rho2_values[(index % n_r2) as usize];
        let r1 = self.rho1_values[((index / n_r2) % n_r1) as usize];
        let b = self.beta_values[(index / (n_r2 * n_r1)) as usize];
        BmcParams {
            rho1: r1,
            rho2: r2,
            beta: b,
        }
    }
}

/// Classification of a single trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    /// Converged; `step` is the raw step at which the stable window begins.
    Converged { step: u64 },
    NotConverged,
    /// Crossed the blow-up threshold at `step`.
    Diverged { step: u64 },
}

/// One (cell, seed) result.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub rho1: f64,
    pub rho2: f64,
    pub beta: f64,
    pub seed_index: u64,
    pub seed: u64,
    pub outcome: Outcome,
}

/// Per-cell aggregate statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CellAggregate {
    pub rho1: f64,
    pub rho2: f64,
    pub beta: f64,
    pub n_seeds: u64,
    pub n_converged: u64,
    pub n_not_converged: u64,
    pub n_diverged: u64,
    pub convergence_fraction: f64,
    /// Lower median of converge steps among converged seeds.
    pub median_converge_step: Option<u64>,
}

/// All rows of a sweep plus per-cell aggregates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    pub aggregates: Vec<CellAggregate>,
}

impl SweepTable {
    /// Recomputes aggregates from rows (cells ordered as first encountered).
    pub fn aggregate_rows(rows: &[SweepRow]) -> Vec<CellAggregate> {
        let mut cells: Vec<((u64, u64, u64), Vec<&SweepRow>)> = Vec::new();
        for row in rows {
            let key = (row.rho1.to_bits(), row.rho2.to_bits(), row.beta.to_bits());
            match cells.iter_mut().find(|(k, _)| *k == key) {
                Some((_, v)) => v.push(row),
                None => cells.push((key, vec![row])),
            }
        }
        cells
            .into_iter()
            .map(|(_, rows)| {
                let mut steps: Vec<u64> = rows
                    .iter()
                    .filter_map(|r| match r.outcome {
                        Outcome::Converged { step } => Some(step),
                        _ => None,
                    })
                    .collect();
                steps.sort_unstable();
                let n_conv = steps.len() as u64;
                let n_div = rows
                    .iter()
                    .filter(|r| matches!(r.outcome, Outcome::Diverged { .. }))
                    .count() as u64;
                let n = rows.len() as u64;
                CellAggregate {
                    rho1: rows[0].rho1,
                    rho2: rows[0].rho2,
                    beta: rows[0].beta,
                    n_seeds: n,
                    n_converged: n_conv,
                    n_not_converged: n - n_conv - n_div,
                    n_diverged: n_div,
                    convergence_fraction: n_conv as f64 / n as f64,
                    median_converge_step: if steps.is_empty() {
                        None
                    } else {
                        Some(steps[(steps.len() - 1) / 2])
                    },
                }
            })
            .collect()
    }

    pub fn aggregate_for(&self, rho1: f64, rho2: f64, beta: f64) -> Option<&CellAggregate> {
        self.aggregates
            .iter()
            .find(|a| a.rho1 == rho1 && a.rho2 == rho2 && a.beta == beta)
    }
}

/// Runs the full grid. Trajectories execute in parallel; the result is a
/// deterministic function of `(spec, grid)` alone.
pub fn run_sweep(spec: &SystemSpec, grid: &SweepGrid) -> Result<SweepTable> {
    grid.validate()?;
    let n_cells = grid.n_cells();
    let total = n_cells * grid.n_seeds;
    let rows: Result<Vec<SweepRow>> = (0..total)
        .into_par_iter()
        .map(|i| {
            let cell_index = i / grid.n_seeds;
            let seed_index = i % grid.n_seeds;
            let params = grid.cell(cell_index);
            let seed = derive_seed(grid.base_seed, cell_index, seed_index);
            let mut cfg = grid.sde;
            cfg.seed = seed;
            cfg.n_steps = grid.criterion.max_steps;
            let traj = integrate(spec, &Controller::Bmc(params), &cfg)?;
            let outcome = match traj.terminated_early {
                Some(step) => Outcome::Diverged { step },
                None => match detect_convergence(&traj, &grid.criterion) {
                    Some(idx) => Outcome::Converged {
                        step: traj.steps[idx],
                    },
                    None => Outcome::NotConverged,
                },
            };
            Ok(SweepRow {
                rho1: params.rho1,
                rho2: params.rho2,
                beta: params.beta,
                seed_index,
                seed,
                outcome,
            })
        })
        .collect();
    let rows = rows?;
    let aggregates = SweepTable::aggregate_rows(&rows);
    Ok(SweepTable { rows, aggregates })
}

/// A monotonicity violation: at fixed (β, ϱ2), the median converge step
/// increased when ϱ1 increased.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrderingViolation {
    pub beta: f64,
    pub rho2: f64,
    pub rho1_low: f64,
    pub rho1_high: f64,
    /// Median at the smaller ϱ1; `None` means no seed converged.
    pub median_low: Option<u64>,
    pub median_high: Option<u64>,
}

/// Checks that, per (β, ϱ2), the median convergence step is non-increasing
/// as ϱ1 increases. Cells with no converged seed count as "slower than any
/// finite median".
pub fn ordering_report(table: &SweepTable) -> Vec<OrderingViolation> {
    let mut betas: Vec<f64> = Vec::new();
    let mut rho2s: Vec<f64> = Vec::new();
    let mut rho1s: Vec<f64> = Vec::new();
    for a in &table.aggregates {
        if !betas.contains(&a.beta) {
            betas.push(a.beta);
        }
        if !rho2s.contains(&a.rho2) {
            rho2s.push(a.rho2);
        }
        if !rho1s.contains(&a.rho1) {
            rho1s.push(a.rho1);
        }
    }
    rho1s.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let effective = |m: Option<u64>| m.unwrap_or(u64::MAX);
    let mut violations = Vec::new();
    for &beta in &betas {
        for &rho2 in &rho2s {
            let cells: Vec<&CellAggregate> = rho1s
                .iter()
                .filter_map(|&r1| {
                    table
                        .aggregates
                        .iter()
                        .find(|a| a.beta == beta && a.rho2 == rho2 && a.rho1 == r1)
                })
                .collect();
            for pair in cells.windows(2) {
                let (lo, hi) = (pair[0], pair[1]);
                if effective(hi.median_converge_step) > effective(lo.median_converge_step) {
                    violations.push(OrderingViolation {
                        beta,
                        rho2,
                        rho1_low: lo.rho1,
                        rho1_high: hi.rho1,
                        median_low: lo.median_converge_step,
                        median_high: hi.median_converge_step,
                    });
                }
            }
        }
    }
    violations
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{HFamily, State};
    use crate::integrator::DEFAULT_BLOWUP_THRESHOLD;

    fn wgan(c: f64) -> SystemSpec {
        SystemSpec::new(HFamily::wgan_linear(), c).unwrap()
    }

    fn small_grid() -> SweepGrid {
        SweepGrid {
            rho1_values: vec![0.0],
            rho2_values: vec![0.0],
            beta_values: vec![2.0],
            n_seeds: 3,
            base_seed: 11,
            sde: SdeConfig {
                dt: 0.1,
                n_steps: 1,
                record_stride: 1,
                x0: State::new(1.0, 1.0),
                seed: 0,
                blowup_threshold: DEFAULT_BLOWUP_THRESHOLD,
            },
            criterion: ConvergenceCriterion {
                tol: 1e-2,
                window: 10,
                max_steps: 2000,
            },
        }
    }

    #[test]
    fn null_cell_never_converges() {
        // ϱ1=ϱ2=0 from (1,1): the explicit-Euler norm never decreases.
        let table = run_sweep(&wgan(1.0), &small_grid()).unwrap();
        assert_eq!(table.rows.len(), 3);
        for row in &table.rows {
            assert_eq!(row.outcome, Outcome::NotConverged);
        }
        assert_eq!(table.aggregates[0].convergence_fraction, 0.0);
        assert_eq!(table.aggregates[0].median_converge_step, None);
    }

    #[test]
    fn rows_cover_every_cell_seed_pair_once() {
        let mut grid = small_grid();
        grid.rho1_values = vec![0.0, 0.1];
        grid.rho2_values = vec![0.001, 0.01];
        grid.beta_values = vec![1.0, 2.0];
        grid.n_seeds = 2;
        grid.criterion.max_steps = 50;
        let table = run_sweep(&wgan(1.0), &grid).unwrap();
        assert_eq!(table.rows.len(), 2 * 2 * 2 * 2);
        let mut keys: Vec<_> = table
            .rows
            .iter()
            .map(|r| {
                (
                    r.rho1.to_bits(),
                    r.rho2.to_bits(),
                    r.beta.to_bits(),
                    r.seed_index,
                )
            })
            .collect();
        keys.sort();
        keys.dedup();
        assert_eq!(keys.len(), 16);
        assert_eq!(table.aggregates.len(), 8);
    }

    #[test]
    fn doubling_seeds_preserves_existing_rows() {
        let grid = small_grid();
        let mut grid2 = grid.clone();
        grid2.n_seeds = 6;
        let a = run_sweep(&wgan(1.0), &grid).unwrap();
        let b = run_sweep(&wgan(1.0), &grid2).unwrap();
        for (x, y) in a.rows.iter().zip(b.rows.iter()) {
            assert_eq!(x.seed, y.seed);
            assert_eq!(x.outcome, y.outcome);
        }
    }

    #[test]
    fn sweep_is_deterministic_across_thread_counts() {
        let mut grid = small_grid();
        grid.rho1_values = vec![0.1, 0.3];
        grid.n_seeds = 4;
        grid.criterion.max_steps = 500;
        let spec = wgan(1.0);
        let pool1 = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let pool4 = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap();
        let a = pool1.install(|| run_sweep(&spec, &grid)).unwrap();
        let b = pool4.install(|| run_sweep(&spec, &grid)).unwrap();
        assert_eq!(a, b);
    }

    fn fixture_row(rho1: f64, rho2: f64, beta: f64, step: Option<u64>) -> SweepRow {
        SweepRow {
            rho1,
            rho2,
            beta,
            seed_index: 0,
            seed: 0,
            outcome: match step {
                Some(step) => Outcome::Converged { step },
                None => Outcome::NotConverged,
            },
        }
    }

    #[test]
    fn ordering_report_empty_when_uniform() {
        let rows: Vec<SweepRow> = [0.001, 0.01, 0.1]
            .iter()
            .map(|&r1| fixture_row(r1, 0.01, 1.0, Some(500)))
            .collect();
        let aggregates = SweepTable::aggregate_rows(&rows);
        let table = SweepTable { rows, aggregates };
        assert!(ordering_report(&table).is_empty());
    }

    #[test]
    fn ordering_report_flags_exactly_the_inversion() {
        // Median increases from ϱ1=0.01 to ϱ1=0.1: one violation.
        let rows = vec![
            fixture_row(0.001, 0.01, 1.0, Some(40_000)),
            fixture_row(0.01, 0.01, 1.0, Some(10_000)),
            fixture_row(0.1, 0.01, 1.0, Some(20_000)),
        ];
        let aggregates = SweepTable::aggregate_rows(&rows);
        let table = SweepTable { rows, aggregates };
        let v = ordering_report(&table);
        assert_eq!(v.len(), 1);
        assert_eq!((v[0].rho1_low, v[0].rho1_high), (0.01, 0.1));
        assert_eq!(v[0].median_low, Some(10_000));
        assert_eq!(v[0].median_high, Some(20_000));
    }

    #[test]
    fn ordering_report_accepts_published_pattern() {
        // β=1, ϱ2=0.01 medians 40k ≥ 10k ≥ 0.4k: no violation. A cell with
        // no converged seeds is slower than any finite median.
        let rows = vec![
            fixture_row(0.001, 0.01, 1.0, Some(40_000)),
            fixture_row(0.01, 0.01, 1.0, Some(10_000)),
            fixture_row(0.1, 0.01, 1.0, Some(400)),
            fixture_row(0.001, 0.0001, 1.0, None),
            fixture_row(0.01, 0.0001, 1.0, Some(25_000)),
            fixture_row(0.1, 0.0001, 1.0, Some(600)),
        ];
        let aggregates = SweepTable::aggregate_rows(&rows);
        let table = SweepTable { rows, aggregates };
        assert!(ordering_report(&table).is_empty());
    }

    #[test]
    fn derive_seed_is_stable_and_spread() {
        assert_eq!(derive_seed(1, 2, 3), derive_seed(1, 2, 3));
        let mut seen = std::collections::HashSet::new();
        for cell in 0..50u64 {
            for idx in 0..50u64 {
                seen.insert(derive_seed(42, cell, idx));
            }
        }
        assert_eq!(seen.len(), 2500);
    }

    #[test]
    fn grid_validation() {
        let mut g = small_grid();
        g.rho1_values.clear();
        assert!(g.validate().is_err());
        let mut g = small_grid();
        g.n_seeds = 0;
        assert!(g.validate().is_err());
        let mut g = small_grid();
        g.rho1_values = vec![-0.1];
        assert!(g.validate().is_err());
    }
}
