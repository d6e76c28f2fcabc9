//! Simultaneous-SGD GAN trainer with the state-multiplicative noise
//! regularizer.
//!
//! Base losses are the non-saturating GAN objectives, both ascended:
//!
//! ```text
//! L_D = E[log σ(D(x))] + E[log σ(−D(G(z)))]
//! L_G = E[log σ(D(G(z)))]
//! ```
//!
//! The regularizers add, per player, the β=2 controller terms expressed on
//! discriminator outputs (expectations estimated on the minibatch, product
//! terms as products of batch means):
//!
//! ```text
//! R1_D = ½ϱ1·E[D(x)²]                R1_G = ½ϱ1·E[D(G(z))²]
//! R2_D = ¼ϱ2·E[D(x)⁴] + ½ϱ2·E[D(G(z))²]·E[D(x)²]
//! R2_G = ¼ϱ2·E[D(G(z))⁴] + ½ϱ2·E[D(G(z))²]·E[D(x)²]
//! ```
//!
//! One pair (ΔB1, ΔB2) ~ N(0, lr) is drawn per optimizer step and shared by
//! both players; the update ascends
//! θ += lr·∇L + ΔB1·∇R1 + ΔB2·∇R2, the Euler–Maruyama discretization of the
//! controlled gradient flow with the learning rate in the role of dt.
//!
//! The discriminator's output layer starts at zero (hidden layers draw from
//! N(0, 1/fan_in)); the generator is fully randomly initialized.

use serde::{Deserialize, Serialize};

use crate::controller::BmcParams;
use crate::dynamics::sigmoid;
use crate::error::{Error, Result};
use crate::noise::{mix64, NoiseStream};
use crate::toygan::data::DataSpec;
use crate::toygan::metrics::{energy_distance, mean_output_distance};
use crate::toygan::mlp::{Activation, BatchCache, MlpSpec};

/// Stream ids carved out of one training seed. Fixed: renumbering would
/// change every recorded run.
pub(crate) mod streams {
    pub const GEN_INIT: u64 = 10;
    pub const DISC_INIT: u64 = 11;
    pub const DATA: u64 = 12;
    pub const LATENT: u64 = 13;
    pub const NOISE_B1: u64 = 14;
    pub const NOISE_B2: u64 = 15;
    pub const EVAL_LATENTS: u64 = 16;
    pub const FIT_METRIC: u64 = 17;
}

/// Full configuration of one training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GanTrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub n_steps: u64,
    /// Controller coefficients; β must equal 2 in this module.
    pub bmc: BmcParams,
    pub seed: u64,
    pub snapshot_stride: u64,
    pub latent_dim: usize,
    pub data: DataSpec,
    /// Steps between fit-metric evaluations; 0 disables them.
    pub fit_metric_stride: u64,
    /// Samples per side of the fit-metric estimate.
    pub fit_metric_samples: usize,
    /// Size of the fixed latent batch shared by all snapshots.
    pub eval_latent_count: usize,
    pub gen_hidden: Vec<usize>,
    pub disc_hidden: Vec<usize>,
    pub activation: Activation,
}

impl GanTrainConfig {
    /// Defaults used throughout: lr 0.05, batch 64, 20k steps, snapshots
    /// every 20 steps, 2-32-32-out generator and in-32-32-1 discriminator.
    pub fn defaults(data: DataSpec, bmc: BmcParams, seed: u64) -> Self {
        Self {
            learning_rate: 0.05,
            batch_size: 64,
            n_steps: 20_000,
            bmc,
            seed,
            snapshot_stride: 20,
            latent_dim: 2,
            data,
            fit_metric_stride: 200,
            fit_metric_samples: 512,
            eval_latent_count: 256,
            gen_hidden: vec![32, 32],
            disc_hidden: vec![32, 32],
            activation: Activation::Tanh,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.learning_rate.is_finite() || self.learning_rate <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.batch_size == 0 || self.n_steps == 0 || self.snapshot_stride == 0 {
            return Err(Error::InvalidArgument(
                "batch_size, n_steps and snapshot_stride must be at least 1".into(),
            ));
        }
        if self.latent_dim == 0 || self.eval_latent_count == 0 {
            return Err(Error::InvalidArgument(
                "latent_dim and eval_latent_count must be at least 1".into(),
            ));
        }
        if self.bmc.beta != 2.0 {
            return Err(Error::InvalidArgument(format!(
                "the trainer fixes beta = 2, got {}",
                self.bmc.beta
            )));
        }
        if self.bmc.rho1 < 0.0 || self.bmc.rho2 < 0.0 {
            return Err(Error::InvalidArgument(
                "controller coefficients must be non-negative".into(),
            ));
        }
        if self.fit_metric_stride > 0 && self.fit_metric_samples < 100 {
            return Err(Error::InvalidArgument(
                "fit_metric_samples must be at least 100".into(),
            ));
        }
        self.data.validate()
    }

    pub fn gen_spec(&self) -> Result<MlpSpec> {
        MlpSpec::new(
            self.latent_dim,
            self.gen_hidden.clone(),
            self.data.dim(),
            self.activation,
        )
    }

    pub fn disc_spec(&self) -> Result<MlpSpec> {
        MlpSpec::new(self.data.dim(), self.disc_hidden.clone(), 1, self.activation)
    }
}

/// Generator parameters captured at one training step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Snapshot {
    pub step: u64,
    pub gen_params: Vec<f64>,
    /// Identifies the latent batch the snapshot is evaluated against.
    pub latents_id: u64,
}

/// The latent batch shared by every snapshot of a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalLatents {
    pub id: u64,
    pub dim: usize,
    pub z: Vec<f64>,
}

impl EvalLatents {
    pub fn count(&self) -> usize {
        self.z.len() / self.dim
    }

    fn draw(stream: &mut NoiseStream, count: usize, dim: usize) -> Self {
        let z: Vec<f64> = (0..count * dim).map(|_| stream.normal()).collect();
        let mut id = z.len() as u64;
        for v in &z {
            id = mix64(id ^ v.to_bits());
        }
        Self { id, dim, z }
    }
}

/// One row of the training log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrainRecord {
    pub step: u64,
    pub loss_d: f64,
    pub loss_g: f64,
    /// Present on snapshot steps: mean generator-output distance to the
    /// previous snapshot.
    pub shifting_diff: Option<f64>,
    /// Present on fit-metric steps: energy distance to the data distribution.
    pub fit_metric: Option<f64>,
}

/// Everything produced by one training run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutput {
    pub gen_spec: MlpSpec,
    pub disc_spec: MlpSpec,
    pub gen_params: Vec<f64>,
    pub disc_params: Vec<f64>,
    pub records: Vec<TrainRecord>,
    pub snapshots: Vec<Snapshot>,
    pub eval_latents: EvalLatents,
}

impl TrainOutput {
    /// (step, value) series of snapshot-to-snapshot generator drift.
    pub fn shifting_series(&self) -> Vec<(u64, f64)> {
        self.records
            .iter()
            .filter_map(|r| r.shifting_diff.map(|v| (r.step, v)))
            .collect()
    }
}

/// Networks, parameters, and reusable scratch space for one run.
pub struct ToyGan {
    pub gen_spec: MlpSpec,
    pub disc_spec: MlpSpec,
    pub gen_params: Vec<f64>,
    pub disc_params: Vec<f64>,
    cache_g: BatchCache,
    cache_dr: BatchCache,
    cache_df: BatchCache,
    up_real: Vec<f64>,
    up_fake_d: Vec<f64>,
    up_fake_g: Vec<f64>,
    fake_input_grad: Vec<f64>,
    grad_d: Vec<f64>,
    grad_g: Vec<f64>,
}

impl ToyGan {
    /// Initializes both networks from the configured seed. The
    /// discriminator's output layer starts at zero.
    pub fn new(cfg: &GanTrainConfig) -> Result<Self> {
        cfg.validate()?;
        let gen_spec = cfg.gen_spec()?;
        let disc_spec = cfg.disc_spec()?;
        let gen_params =
            gen_spec.init_params(&mut NoiseStream::new(cfg.seed, streams::GEN_INIT));
        let mut disc_params =
            disc_spec.init_params(&mut NoiseStream::new(cfg.seed, streams::DISC_INIT));
        for v in &mut disc_params[disc_spec.output_layer_range()] {
            *v = 0.0;
        }
        let (gp, dp) = (gen_params.len(), disc_params.len());
        Ok(Self {
            gen_spec,
            disc_spec,
            gen_params,
            disc_params,
            cache_g: BatchCache::default(),
            cache_dr: BatchCache::default(),
            cache_df: BatchCache::default(),
            up_real: Vec::new(),
            up_fake_d: Vec::new(),
            up_fake_g: Vec::new(),
            fake_input_grad: Vec::new(),
            grad_d: vec![0.0; dp],
            grad_g: vec![0.0; gp],
        })
    }

    /// Generator outputs for an arbitrary latent batch, using the current
    /// parameters.
    pub fn generate(&mut self, z: &[f64], n: usize) -> Result<Vec<f64>> {
        self.gen_spec
            .forward_batch(&self.gen_params, z, n, &mut self.cache_g)?;
        Ok(self.gen_spec.outputs(&self.cache_g).to_vec())
    }

    /// One simultaneous ascent step on both composite objectives.
    ///
    /// `x` is the real batch, `z` the latent batch (both row-major,
    /// `n = cfg.batch_size` samples), and (ΔB1, ΔB2) the shared noise
    /// increments. Returns (loss_d, loss_g) of the base objectives evaluated
    /// before the update.
    pub fn bmc_train_step(
        &mut self,
        cfg: &GanTrainConfig,
        x: &[f64],
        z: &[f64],
        db1: f64,
        db2: f64,
        step: u64,
    ) -> Result<(f64, f64)> {
        let n = cfg.batch_size;
        let lr = cfg.learning_rate;
        let (rho1, rho2) = (cfg.bmc.rho1, cfg.bmc.rho2);

        self.gen_spec
            .forward_batch(&self.gen_params, z, n, &mut self.cache_g)?;
        let fake = self.gen_spec.outputs(&self.cache_g);
        self.disc_spec
            .forward_batch(&self.disc_params, x, n, &mut self.cache_dr)?;
        self.disc_spec
            .forward_batch(&self.disc_params, fake, n, &mut self.cache_df)?;
        let d_real = self.disc_spec.outputs(&self.cache_dr);
        let d_fake = self.disc_spec.outputs(&self.cache_df);

        let inv_n = 1.0 / n as f64;
        let mean_r2 = d_real.iter().map(|d| d * d).sum::<f64>() * inv_n;
        let mean_f2 = d_fake.iter().map(|d| d * d).sum::<f64>() * inv_n;
        let loss_d = d_real.iter().map(|&d| log_sigmoid(d)).sum::<f64>() * inv_n
            + d_fake.iter().map(|&d| log_sigmoid(-d)).sum::<f64>() * inv_n;
        let loss_g = d_fake.iter().map(|&d| log_sigmoid(d)).sum::<f64>() * inv_n;
        if !loss_d.is_finite() || !loss_g.is_finite() {
            return Err(Error::TrainingDiverged { step });
        }

        // Combined upstream weights: lr on the base loss, ΔB on the
        // regularizer coefficient functions.
        self.up_real.clear();
        self.up_real.extend(d_real.iter().map(|&d| {
            lr * sigmoid(-d) + db1 * (rho1 * d) + db2 * (rho2 * (d * d * d + mean_f2 * d))
        }));
        self.up_fake_d.clear();
        self.up_fake_d
            .extend(d_fake.iter().map(|&d| {
                lr * (-sigmoid(d)) + db2 * (rho2 * mean_r2 * d)
            }));
        self.up_fake_g.clear();
        self.up_fake_g.extend(d_fake.iter().map(|&d| {
            lr * sigmoid(-d) + db1 * (rho1 * d) + db2 * (rho2 * (d * d * d + mean_r2 * d))
        }));

        self.grad_d.fill(0.0);
        self.disc_spec.backward_batch(
            &self.disc_params,
            x,
            n,
            &mut self.cache_dr,
            &self.up_real,
            Some(&mut self.grad_d),
            None,
        )?;
        self.disc_spec.backward_batch(
            &self.disc_params,
            fake,
            n,
            &mut self.cache_df,
            &self.up_fake_d,
            Some(&mut self.grad_d),
            None,
        )?;

        self.fake_input_grad.clear();
        self.fake_input_grad.resize(n * self.disc_spec.input, 0.0);
        self.disc_spec.backward_batch(
            &self.disc_params,
            fake,
            n,
            &mut self.cache_df,
            &self.up_fake_g,
            None,
            Some(&mut self.fake_input_grad),
        )?;
        self.grad_g.fill(0.0);
        self.gen_spec.backward_batch(
            &self.gen_params,
            z,
            n,
            &mut self.cache_g,
            &self.fake_input_grad,
            Some(&mut self.grad_g),
            None,
        )?;

        for (p, g) in self.disc_params.iter_mut().zip(&self.grad_d) {
            *p += g;
        }
        for (p, g) in self.gen_params.iter_mut().zip(&self.grad_g) {
            *p += g;
        }
        Ok((loss_d, loss_g))
    }
}

#[inline]
fn log_sigmoid(x: f64) -> f64 {
    // log σ(x) = −log(1 + e^{−x}), stable on both tails.
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

/// Runs the configured training loop, logging losses every step, snapshots
/// and shifting differences every `snapshot_stride` steps, and the fit
/// metric every `fit_metric_stride` steps.
pub fn train(cfg: &GanTrainConfig) -> Result<TrainOutput> {
    cfg.validate()?;
    let mut gan = ToyGan::new(cfg)?;
    let mut data_stream = NoiseStream::new(cfg.seed, streams::DATA);
    let mut latent_stream = NoiseStream::new(cfg.seed, streams::LATENT);
    let mut b1 = NoiseStream::new(cfg.seed, streams::NOISE_B1);
    let mut b2 = NoiseStream::new(cfg.seed, streams::NOISE_B2);
    let mut fit_stream = NoiseStream::new(cfg.seed, streams::FIT_METRIC);
    let eval_latents = EvalLatents::draw(
        &mut NoiseStream::new(cfg.seed, streams::EVAL_LATENTS),
        cfg.eval_latent_count,
        cfg.latent_dim,
    );

    let n_eval = eval_latents.count();
    let data_dim = cfg.data.dim();
    let mut snapshots = Vec::new();
    let mut records = Vec::with_capacity(cfg.n_steps as usize);
    let mut prev_eval_outputs = gan.generate(&eval_latents.z, n_eval)?;
    snapshots.push(Snapshot {
        step: 0,
        gen_params: gan.gen_params.clone(),
        latents_id: eval_latents.id,
    });

    let mut x = Vec::with_capacity(cfg.batch_size * data_dim);
    let mut z = Vec::with_capacity(cfg.batch_size * cfg.latent_dim);
    for k in 0..cfg.n_steps {
        let step = k + 1;
        x.clear();
        cfg.data.sample_into(&mut data_stream, cfg.batch_size, &mut x);
        z.clear();
        z.extend((0..cfg.batch_size * cfg.latent_dim).map(|_| latent_stream.normal()));
        let db1 = b1.increment(cfg.learning_rate)?;
        let db2 = b2.increment(cfg.learning_rate)?;
        let (loss_d, loss_g) = gan
            .bmc_train_step(cfg, &x, &z, db1, db2, step)
            .map_err(|e| match e {
                Error::ShapeMismatch { .. } => e,
                Error::TrainingDiverged { .. } => Error::TrainingDiverged { step },
                other => other,
            })?;

        let is_snapshot = step % cfg.snapshot_stride == 0 || step == cfg.n_steps;
        let shifting_diff = if is_snapshot {
            let outputs = gan.generate(&eval_latents.z, n_eval)?;
            let sd = mean_output_distance(&prev_eval_outputs, &outputs, data_dim);
            prev_eval_outputs = outputs;
            snapshots.push(Snapshot {
                step,
                gen_params: gan.gen_params.clone(),
                latents_id: eval_latents.id,
            });
            Some(sd)
        } else {
            None
        };

        let fit_metric = if cfg.fit_metric_stride > 0
            && (step % cfg.fit_metric_stride == 0 || step == cfg.n_steps)
        {
            let m = cfg.fit_metric_samples;
            let mut zs = Vec::with_capacity(m * cfg.latent_dim);
            zs.extend((0..m * cfg.latent_dim).map(|_| fit_stream.normal()));
            let gen_out = gan.generate(&zs, m)?;
            let mut data_out = Vec::with_capacity(m * data_dim);
            cfg.data.sample_into(&mut fit_stream, m, &mut data_out);
            Some(energy_distance(&gen_out, &data_out, data_dim))
        } else {
            None
        };

        records.push(TrainRecord {
            step,
            loss_d,
            loss_g,
            shifting_diff,
            fit_metric,
        });
    }

    Ok(TrainOutput {
        gen_spec: gan.gen_spec.clone(),
        disc_spec: gan.disc_spec.clone(),
        gen_params: gan.gen_params,
        disc_params: gan.disc_params,
        records,
        snapshots,
        eval_latents,
    })
}

/// The three gradient pieces of one player's composite objective: the base
/// ascent gradient and the coefficient gradients of the Ḃ1 and Ḃ2 terms.
#[derive(Debug, Clone)]
pub struct PlayerGradients {
    pub loss: f64,
    pub base: Vec<f64>,
    pub reg1: Vec<f64>,
    pub reg2: Vec<f64>,
}

struct Forwarded {
    fake: Vec<f64>,
    d_real: Vec<f64>,
    d_fake: Vec<f64>,
    mean_r2: f64,
    mean_f2: f64,
}

fn forward_all(
    gen_spec: &MlpSpec,
    disc_spec: &MlpSpec,
    gen_params: &[f64],
    disc_params: &[f64],
    x: &[f64],
    z: &[f64],
    n: usize,
) -> Result<Forwarded> {
    let mut cache = BatchCache::default();
    gen_spec.forward_batch(gen_params, z, n, &mut cache)?;
    let fake = gen_spec.outputs(&cache).to_vec();
    disc_spec.forward_batch(disc_params, x, n, &mut cache)?;
    let d_real = disc_spec.outputs(&cache).to_vec();
    disc_spec.forward_batch(disc_params, &fake, n, &mut cache)?;
    let d_fake = disc_spec.outputs(&cache).to_vec();
    let inv_n = 1.0 / n as f64;
    let mean_r2 = d_real.iter().map(|d| d * d).sum::<f64>() * inv_n;
    let mean_f2 = d_fake.iter().map(|d| d * d).sum::<f64>() * inv_n;
    Ok(Forwarded {
        fake,
        d_real,
        d_fake,
        mean_r2,
        mean_f2,
    })
}

/// Discriminator-side gradients, one backward pass per piece. Used by tests
/// and inspection; the trainer fuses the pieces into one pass.
pub fn disc_gradients(
    gen_spec: &MlpSpec,
    disc_spec: &MlpSpec,
    gen_params: &[f64],
    disc_params: &[f64],
    x: &[f64],
    z: &[f64],
    n: usize,
    bmc: &BmcParams,
) -> Result<PlayerGradients> {
    let f = forward_all(gen_spec, disc_spec, gen_params, disc_params, x, z, n)?;
    let inv_n = 1.0 / n as f64;
    let loss = f.d_real.iter().map(|&d| log_sigmoid(d)).sum::<f64>() * inv_n
        + f.d_fake.iter().map(|&d| log_sigmoid(-d)).sum::<f64>() * inv_n;

    let backward_pair = |up_real: Vec<f64>, up_fake: Vec<f64>| -> Result<Vec<f64>> {
        let mut cache = BatchCache::default();
        let mut grads = vec![0.0; disc_spec.param_count()];
        disc_spec.forward_batch(disc_params, x, n, &mut cache)?;
        disc_spec.backward_batch(disc_params, x, n, &mut cache, &up_real, Some(&mut grads), None)?;
        disc_spec.forward_batch(disc_params, &f.fake, n, &mut cache)?;
        disc_spec.backward_batch(
            disc_params,
            &f.fake,
            n,
            &mut cache,
            &up_fake,
            Some(&mut grads),
            None,
        )?;
        Ok(grads)
    };

    let base = backward_pair(
        f.d_real.iter().map(|&d| sigmoid(-d)).collect(),
        f.d_fake.iter().map(|&d| -sigmoid(d)).collect(),
    )?;
    let reg1 = backward_pair(
        f.d_real.iter().map(|&d| bmc.rho1 * d).collect(),
        vec![0.0; n],
    )?;
    let reg2 = backward_pair(
        f.d_real
            .iter()
            .map(|&d| bmc.rho2 * (d * d * d + f.mean_f2 * d))
            .collect(),
        f.d_fake
            .iter()
            .map(|&d| bmc.rho2 * f.mean_r2 * d)
            .collect(),
    )?;
    Ok(PlayerGradients {
        loss,
        base,
        reg1,
        reg2,
    })
}

/// Generator-side gradients, one backward pass per piece.
pub fn gen_gradients(
    gen_spec: &MlpSpec,
    disc_spec: &MlpSpec,
    gen_params: &[f64],
    disc_params: &[f64],
    x: &[f64],
    z: &[f64],
    n: usize,
    bmc: &BmcParams,
) -> Result<PlayerGradients> {
    let f = forward_all(gen_spec, disc_spec, gen_params, disc_params, x, z, n)?;
    let inv_n = 1.0 / n as f64;
    let loss = f.d_fake.iter().map(|&d| log_sigmoid(d)).sum::<f64>() * inv_n;

    let through = |upstream: Vec<f64>| -> Result<Vec<f64>> {
        let mut cache = BatchCache::default();
        let mut input_grad = vec![0.0; n * disc_spec.input];
        disc_spec.forward_batch(disc_params, &f.fake, n, &mut cache)?;
        disc_spec.backward_batch(
            disc_params,
            &f.fake,
            n,
            &mut cache,
            &upstream,
            None,
            Some(&mut input_grad),
        )?;
        let mut grads = vec![0.0; gen_spec.param_count()];
        gen_spec.forward_batch(gen_params, z, n, &mut cache)?;
        gen_spec.backward_batch(gen_params, z, n, &mut cache, &input_grad, Some(&mut grads), None)?;
        Ok(grads)
    };

    let base = through(f.d_fake.iter().map(|&d| sigmoid(-d)).collect())?;
    let reg1 = through(f.d_fake.iter().map(|&d| bmc.rho1 * d).collect())?;
    let reg2 = through(
        f.d_fake
            .iter()
            .map(|&d| bmc.rho2 * (d * d * d + f.mean_r2 * d))
            .collect(),
    )?;
    Ok(PlayerGradients {
        loss,
        base,
        reg1,
        reg2,
    })
}

/// Composite discriminator objective L_D + b1·R1_D + b2·R2_D for frozen
/// noise-rate constants (b1, b2).
#[allow(clippy::too_many_arguments)]
pub fn disc_objective(
    gen_spec: &MlpSpec,
    disc_spec: &MlpSpec,
    gen_params: &[f64],
    disc_params: &[f64],
    x: &[f64],
    z: &[f64],
    n: usize,
    bmc: &BmcParams,
    b1: f64,
    b2: f64,
) -> Result<f64> {
    let f = forward_all(gen_spec, disc_spec, gen_params, disc_params, x, z, n)?;
    let inv_n = 1.0 / n as f64;
    let base = f.d_real.iter().map(|&d| log_sigmoid(d)).sum::<f64>() * inv_n
        + f.d_fake.iter().map(|&d| log_sigmoid(-d)).sum::<f64>() * inv_n;
    let mean_r4 = f.d_real.iter().map(|d| d.powi(4)).sum::<f64>() * inv_n;
    let r1 = 0.5 * bmc.rho1 * f.mean_r2;
    let r2 = 0.25 * bmc.rho2 * mean_r4 + 0.5 * bmc.rho2 * f.mean_f2 * f.mean_r2;
    Ok(base + b1 * r1 + b2 * r2)
}

/// Composite generator objective L_G + b1·R1_G + b2·R2_G.
#[allow(clippy::too_many_arguments)]
pub fn gen_objective(
    gen_spec: &MlpSpec,
    disc_spec: &MlpSpec,
    gen_params: &[f64],
    disc_params: &[f64],
    x: &[f64],
    z: &[f64],
    n: usize,
    bmc: &BmcParams,
    b1: f64,
    b2: f64,
) -> Result<f64> {
    let f = forward_all(gen_spec, disc_spec, gen_params, disc_params, x, z, n)?;
    let inv_n = 1.0 / n as f64;
    let base = f.d_fake.iter().map(|&d| log_sigmoid(d)).sum::<f64>() * inv_n;
    let mean_f4 = f.d_fake.iter().map(|d| d.powi(4)).sum::<f64>() * inv_n;
    let r1 = 0.5 * bmc.rho1 * f.mean_f2;
    let r2 = 0.25 * bmc.rho2 * mean_f4 + 0.5 * bmc.rho2 * f.mean_f2 * f.mean_r2;
    Ok(base + b1 * r1 + b2 * r2)
}
