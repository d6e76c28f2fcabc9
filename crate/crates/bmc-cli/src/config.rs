//! JSON run configuration: every section optional, every field defaulted,
//! unknown keys rejected. The fully-resolved configuration is written back
//! next to each command's outputs.

use serde::{Deserialize, Serialize};

use bmc_core::controller::BmcParams;
use bmc_core::dynamics::{HFamily, HKind, State, SystemSpec};
use bmc_core::integrator::SdeConfig;
use bmc_core::stability::ConvergenceCriterion;
use bmc_core::sweep::SweepGrid;
use bmc_core::toygan::{Activation, DataSpec, GanTrainConfig};

use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub system: SystemSection,
    /// Controller coefficients; omit the section for the uncontrolled
    /// baseline.
    #[serde(default)]
    pub controller: Option<ControllerSection>,
    #[serde(default)]
    pub sde: SdeSection,
    #[serde(default)]
    pub criterion: CriterionSection,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub toygan: Option<ToyganSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    #[serde(default = "default_family")]
    pub family: HKind,
    #[serde(default = "default_c")]
    pub c: f64,
}

fn default_family() -> HKind {
    HKind::WganLinear
}

fn default_c() -> f64 {
    1.0
}

impl Default for SystemSection {
    fn default() -> Self {
        Self {
            family: default_family(),
            c: default_c(),
        }
    }
}

impl SystemSection {
    pub fn to_spec(&self) -> Result<SystemSpec, CliError> {
        SystemSpec::new(HFamily::from_kind(self.family), self.c).map_err(CliError::from_config)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerSection {
    pub rho1: f64,
    pub rho2: f64,
    #[serde(default = "default_beta")]
    pub beta: f64,
}

fn default_beta() -> f64 {
    2.0
}

impl ControllerSection {
    pub fn to_params(&self) -> Result<BmcParams, CliError> {
        BmcParams::new(self.rho1, self.rho2, self.beta).map_err(CliError::from_config)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct X0Section {
    pub disc: f64,
    pub gen: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SdeSection {
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_n_steps")]
    pub n_steps: u64,
    #[serde(default = "default_stride")]
    pub record_stride: u64,
    #[serde(default = "default_x0")]
    pub x0: X0Section,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_blowup")]
    pub blowup_threshold: f64,
}

fn default_dt() -> f64 {
    0.1
}

fn default_n_steps() -> u64 {
    1000
}

fn default_stride() -> u64 {
    1
}

fn default_x0() -> X0Section {
    X0Section {
        disc: 1.0,
        gen: 1.0,
    }
}

fn default_blowup() -> f64 {
    1e12
}

impl Default for SdeSection {
    fn default() -> Self {
        Self {
            dt: default_dt(),
            n_steps: default_n_steps(),
            record_stride: default_stride(),
            x0: default_x0(),
            seed: 0,
            blowup_threshold: default_blowup(),
        }
    }
}

impl SdeSection {
    pub fn to_config(&self) -> SdeConfig {
        SdeConfig {
            dt: self.dt,
            n_steps: self.n_steps,
            record_stride: self.record_stride,
            x0: State::new(self.x0.disc, self.x0.gen),
            seed: self.seed,
            blowup_threshold: self.blowup_threshold,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CriterionSection {
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_window")]
    pub window: usize,
    #[serde(default = "default_max_steps")]
    pub max_steps: u64,
}

fn default_tol() -> f64 {
    1e-2
}

fn default_window() -> usize {
    100
}

fn default_max_steps() -> u64 {
    100_000
}

impl Default for CriterionSection {
    fn default() -> Self {
        Self {
            tol: default_tol(),
            window: default_window(),
            max_steps: default_max_steps(),
        }
    }
}

impl CriterionSection {
    pub fn to_criterion(&self) -> ConvergenceCriterion {
        ConvergenceCriterion {
            tol: self.tol,
            window: self.window,
            max_steps: self.max_steps,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default = "default_rho1_values")]
    pub rho1_values: Vec<f64>,
    #[serde(default = "default_rho2_values")]
    pub rho2_values: Vec<f64>,
    #[serde(default = "default_beta_values")]
    pub beta_values: Vec<f64>,
    #[serde(default = "default_n_seeds")]
    pub n_seeds: u64,
    #[serde(default)]
    pub base_seed: u64,
}

fn default_rho1_values() -> Vec<f64> {
    vec![0.1, 0.01, 0.001]
}

fn default_rho2_values() -> Vec<f64> {
    vec![0.0001, 0.001, 0.01]
}

fn default_beta_values() -> Vec<f64> {
    vec![1.0, 2.0]
}

fn default_n_seeds() -> u64 {
    20
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            rho1_values: default_rho1_values(),
            rho2_values: default_rho2_values(),
            beta_values: default_beta_values(),
            n_seeds: default_n_seeds(),
            base_seed: 0,
        }
    }
}

impl SweepSection {
    pub fn to_grid(&self, sde: &SdeSection, criterion: &CriterionSection) -> SweepGrid {
        SweepGrid {
            rho1_values: self.rho1_values.clone(),
            rho2_values: self.rho2_values.clone(),
            beta_values: self.beta_values.clone(),
            n_seeds: self.n_seeds,
            base_seed: self.base_seed,
            sde: sde.to_config(),
            criterion: criterion.to_criterion(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToyganSection {
    #[serde(default = "default_lr")]
    pub learning_rate: f64,
    #[serde(default = "default_batch")]
    pub batch_size: usize,
    #[serde(default = "default_gan_steps")]
    pub n_steps: u64,
    #[serde(default)]
    pub rho1: f64,
    #[serde(default)]
    pub rho2: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_snapshot_stride")]
    pub snapshot_stride: u64,
    #[serde(default = "default_latent_dim")]
    pub latent_dim: usize,
    #[serde(default = "default_data")]
    pub data: DataSpec,
    #[serde(default = "default_fit_stride")]
    pub fit_metric_stride: u64,
    #[serde(default = "default_fit_samples")]
    pub fit_metric_samples: usize,
    #[serde(default = "default_eval_latents")]
    pub eval_latent_count: usize,
    #[serde(default = "default_hidden")]
    pub gen_hidden: Vec<usize>,
    #[serde(default = "default_hidden")]
    pub disc_hidden: Vec<usize>,
    #[serde(default = "default_activation")]
    pub activation: Activation,
}

fn default_lr() -> f64 {
    0.05
}

fn default_batch() -> usize {
    64
}

fn default_gan_steps() -> u64 {
    20_000
}

fn default_snapshot_stride() -> u64 {
    20
}

fn default_latent_dim() -> usize {
    2
}

fn default_data() -> DataSpec {
    DataSpec::Gauss1d {
        mean: 4.0,
        std: 0.25,
    }
}

fn default_fit_stride() -> u64 {
    200
}

fn default_fit_samples() -> usize {
    512
}

fn default_eval_latents() -> usize {
    256
}

fn default_hidden() -> Vec<usize> {
    vec![32, 32]
}

fn default_activation() -> Activation {
    Activation::Tanh
}

impl Default for ToyganSection {
    fn default() -> Self {
        Self {
            learning_rate: default_lr(),
            batch_size: default_batch(),
            n_steps: default_gan_steps(),
            rho1: 0.0,
            rho2: 0.0,
            seed: 0,
            snapshot_stride: default_snapshot_stride(),
            latent_dim: default_latent_dim(),
            data: default_data(),
            fit_metric_stride: default_fit_stride(),
            fit_metric_samples: default_fit_samples(),
            eval_latent_count: default_eval_latents(),
            gen_hidden: default_hidden(),
            disc_hidden: default_hidden(),
            activation: default_activation(),
        }
    }
}

impl ToyganSection {
    pub fn to_train_config(&self) -> Result<GanTrainConfig, CliError> {
        let bmc = BmcParams::new(self.rho1, self.rho2, 2.0).map_err(CliError::from_config)?;
        let cfg = GanTrainConfig {
            learning_rate: self.learning_rate,
            batch_size: self.batch_size,
            n_steps: self.n_steps,
            bmc,
            seed: self.seed,
            snapshot_stride: self.snapshot_stride,
            latent_dim: self.latent_dim,
            data: self.data,
            fit_metric_stride: self.fit_metric_stride,
            fit_metric_samples: self.fit_metric_samples,
            eval_latent_count: self.eval_latent_count,
            gen_hidden: self.gen_hidden.clone(),
            disc_hidden: self.disc_hidden.clone(),
            activation: self.activation,
        };
        cfg.validate().map_err(CliError::from_config)?;
        Ok(cfg)
    }
}

impl RunConfig {
    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))
    }

    /// Pretty JSON of the configuration with all defaults applied.
    pub fn resolved_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes") + "\n"
    }
}
