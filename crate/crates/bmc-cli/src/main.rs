//! `bmc` — simulate, analyze, and sweep noise-controlled training dynamics.
//!
//! Subcommands write CSV/JSON files into an output directory together with
//! the fully-resolved configuration that produced them. Every command is a
//! deterministic function of its config file: identical configs give
//! byte-identical outputs regardless of `--threads`.

mod config;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use bmc_core::controller::Controller;
use bmc_core::error::Error;
use bmc_core::report;
use bmc_core::stability::{check_condition, detect_convergence, empirical_rate, StabilityReport};
use bmc_core::sweep::{ordering_report, run_sweep, OrderingViolation};
use bmc_core::toygan;

use config::RunConfig;

/// Tail fraction of recorded points used for the empirical rate estimate.
const RATE_TAIL_FRACTION: f64 = 0.5;

#[derive(Parser)]
#[command(
    name = "bmc",
    version,
    about = "Noise-controlled GAN training dynamics: SDE simulation, stability analysis, sweeps, and a toy GAN"
)]
struct Cli {
    /// Upper bound on worker threads. Outputs never depend on this value.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, ValueEnum)]
enum SweepFormat {
    /// Rows CSV and aggregates JSON.
    #[default]
    Both,
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one trajectory; writes trajectory.csv and stability.json.
    Simulate {
        /// JSON run configuration.
        #[arg(long)]
        config: PathBuf,
        /// Output directory (created if missing).
        #[arg(long)]
        out: PathBuf,
    },
    /// Sample the drift field on a grid; writes field.csv.
    Field {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = -2.0, allow_hyphen_values = true)]
        x_min: f64,
        #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
        x_max: f64,
        #[arg(long, default_value_t = -2.0, allow_hyphen_values = true)]
        y_min: f64,
        #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
        y_max: f64,
        /// Grid points per axis.
        #[arg(long, default_value_t = 21)]
        resolution: usize,
    },
    /// Run the (rho1, rho2, beta) × seeds grid; writes sweep.csv and
    /// sweep_aggregates.json.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        format: SweepFormat,
    },
    /// Evaluate the stability bound for one parameter set; prints JSON.
    Phi {
        #[arg(long)]
        rho1: f64,
        #[arg(long)]
        rho2: f64,
        #[arg(long, default_value_t = 2.0)]
        beta: f64,
        #[arg(long, default_value_t = 0.0)]
        alpha1: f64,
        #[arg(long, default_value_t = 0.0)]
        alpha2: f64,
        #[arg(long, default_value_t = 0.0)]
        alpha3: f64,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        c: f64,
        /// Rate slack ε; defaults to min(0.1·margin, 1e-3) when the
        /// condition holds.
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Train the toy GAN; writes training_log.csv (and optionally
    /// snapshots.bin + snapshots.json).
    Toygan {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Persist generator snapshots as a flat binary vector file with a
        /// JSON sidecar describing the layout.
        #[arg(long)]
        save_snapshots: bool,
    },
}

/// Errors mapped onto exit codes: configuration and I/O problems exit 2,
/// internal numerical failures exit 3.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    pub fn from_config(e: Error) -> Self {
        CliError::Config(e.to_string())
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "{m}"),
            CliError::Numerical(m) => write!(f, "{m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Overflow { .. }
            | Error::IntegrationDiverged { .. }
            | Error::TrainingDiverged { .. } => CliError::Numerical(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(format!("i/o error: {e}"))
    }
}

fn main() {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            std::process::exit(2);
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .expect("thread pool initializes once");
    }
    if let Err(e) = run(cli.command) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), contents)?;
    Ok(())
}

/// stability.json payload: the theoretical report when the bound is
/// defined, plus empirical quantities from the simulated trajectory.
#[derive(Serialize)]
struct StabilityOutput {
    report: Option<StabilityReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    phi_unbounded: Option<String>,
    terminated_early: Option<u64>,
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Simulate { config, out } => cmd_simulate(&config, &out),
        Command::Field {
            config,
            out,
            x_min,
            x_max,
            y_min,
            y_max,
            resolution,
        } => cmd_field(&config, &out, (x_min, x_max), (y_min, y_max), resolution),
        Command::Sweep {
            config,
            out,
            format,
        } => cmd_sweep(&config, &out, format),
        Command::Phi {
            rho1,
            rho2,
            beta,
            alpha1,
            alpha2,
            alpha3,
            c,
            epsilon,
        } => cmd_phi(rho1, rho2, beta, [alpha1, alpha2, alpha3], c, epsilon),
        Command::Toygan {
            config,
            out,
            save_snapshots,
        } => cmd_toygan(&config, &out, save_snapshots),
    }
}

fn cmd_simulate(config_path: &Path, out: &Path) -> Result<(), CliError> {
    let cfg = RunConfig::load(config_path)?;
    let spec = cfg.system.to_spec()?;
    let controller = match &cfg.controller {
        Some(c) => Controller::Bmc(c.to_params()?),
        None => Controller::Null,
    };
    let sde = cfg.sde.to_config();
    sde.validate().map_err(CliError::from_config)?;
    let traj = bmc_core::integrator::integrate(&spec, &controller, &sde)?;

    let criterion = cfg.criterion.to_criterion();
    let converge_step = detect_convergence(&traj, &criterion).map(|i| traj.steps[i]);
    let emp_rate = empirical_rate(&traj, RATE_TAIL_FRACTION).ok();

    let (mut report, phi_unbounded) = match &cfg.controller {
        Some(c) => {
            let params = c.to_params()?;
            match check_condition(&params, spec.family.alphas, spec.c, None) {
                Ok(r) => (Some(r), None),
                Err(Error::UnboundedObjective(msg)) => (None, Some(msg)),
                Err(e) => return Err(e.into()),
            }
        }
        None => (
            None,
            Some("uncontrolled run: the stability bound requires rho2 > 0 and beta > 1".into()),
        ),
    };
    if let Some(r) = report.as_mut() {
        r.empirical_rate = emp_rate;
        r.converge_step = converge_step;
    }
    let stability = StabilityOutput {
        report,
        phi_unbounded,
        terminated_early: traj.terminated_early,
    };

    write_file(out, "trajectory.csv", &report::trajectory_csv(&traj))?;
    write_file(
        out,
        "stability.json",
        &(serde_json::to_string_pretty(&stability).expect("serializes") + "\n"),
    )?;
    write_file(out, "resolved_config.json", &cfg.resolved_json())?;
    Ok(())
}

fn cmd_field(
    config_path: &Path,
    out: &Path,
    x_range: (f64, f64),
    y_range: (f64, f64),
    resolution: usize,
) -> Result<(), CliError> {
    let cfg = RunConfig::load(config_path)?;
    let spec = cfg.system.to_spec()?;
    let field = bmc_core::dynamics::gradient_field(&spec, x_range, y_range, resolution)
        .map_err(CliError::from_config)?;
    write_file(out, "field.csv", &report::field_csv(&field))?;
    write_file(out, "resolved_config.json", &cfg.resolved_json())?;
    Ok(())
}

/// sweep_aggregates.json payload.
#[derive(Serialize)]
struct SweepAggregatesOutput<'a> {
    aggregates: &'a [bmc_core::sweep::CellAggregate],
    ordering_violations: &'a [OrderingViolation],
}

fn cmd_sweep(config_path: &Path, out: &Path, format: SweepFormat) -> Result<(), CliError> {
    let cfg = RunConfig::load(config_path)?;
    let spec = cfg.system.to_spec()?;
    let sweep_section = cfg.sweep.clone().unwrap_or_default();
    let grid = sweep_section.to_grid(&cfg.sde, &cfg.criterion);
    let table = run_sweep(&spec, &grid)?;
    let violations = ordering_report(&table);

    if format != SweepFormat::Json {
        write_file(out, "sweep.csv", &report::sweep_rows_csv(&table))?;
    }
    if format != SweepFormat::Csv {
        let payload = SweepAggregatesOutput {
            aggregates: &table.aggregates,
            ordering_violations: &violations,
        };
        write_file(
            out,
            "sweep_aggregates.json",
            &(serde_json::to_string_pretty(&payload).expect("serializes") + "\n"),
        )?;
    }
    write_file(out, "resolved_config.json", &cfg.resolved_json())?;
    Ok(())
}

/// `phi` output: echoes the parameters next to the report.
#[derive(Serialize)]
struct PhiOutput {
    rho1: f64,
    rho2: f64,
    beta: f64,
    alphas: [f64; 3],
    c: f64,
    report: StabilityReport,
}

fn cmd_phi(
    rho1: f64,
    rho2: f64,
    beta: f64,
    alphas: [f64; 3],
    c: f64,
    epsilon: Option<f64>,
) -> Result<(), CliError> {
    let params =
        bmc_core::controller::BmcParams::new(rho1, rho2, beta).map_err(CliError::from_config)?;
    let report = check_condition(&params, alphas, c, epsilon).map_err(CliError::from_config)?;
    let payload = PhiOutput {
        rho1,
        rho2,
        beta,
        alphas,
        c,
        report,
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&payload).expect("serializes")
    );
    Ok(())
}

/// snapshots.json sidecar describing snapshots.bin.
#[derive(Serialize)]
struct SnapshotSidecar<'a> {
    dtype: &'static str,
    byte_order: &'static str,
    param_count: usize,
    snapshot_steps: Vec<u64>,
    latents_id: u64,
    generator: &'a toygan::MlpSpec,
}

fn cmd_toygan(config_path: &Path, out: &Path, save_snapshots: bool) -> Result<(), CliError> {
    let cfg = RunConfig::load(config_path)?;
    let section = cfg.toygan.clone().unwrap_or_default();
    let train_cfg = section.to_train_config()?;
    let output = toygan::train(&train_cfg)?;

    write_file(out, "training_log.csv", &report::training_log_csv(&output))?;
    write_file(out, "resolved_config.json", &cfg.resolved_json())?;

    if save_snapshots {
        let mut bytes =
            Vec::with_capacity(output.snapshots.len() * output.gen_params.len() * 8);
        for snap in &output.snapshots {
            for v in &snap.gen_params {
                bytes.extend_from_slice(&v.to_le_bytes());
            }
        }
        std::fs::create_dir_all(out)?;
        std::fs::write(out.join("snapshots.bin"), &bytes)?;
        let sidecar = SnapshotSidecar {
            dtype: "f64",
            byte_order: "little_endian",
            param_count: output.gen_params.len(),
            snapshot_steps: output.snapshots.iter().map(|s| s.step).collect(),
            latents_id: output.eval_latents.id,
            generator: &output.gen_spec,
        };
        write_file(
            out,
            "snapshots.json",
            &(serde_json::to_string_pretty(&sidecar).expect("serializes") + "\n"),
        )?;
    }
    Ok(())
}
