//! Stability and fit metrics for toy GAN runs.

use crate::error::{Error, Result};
use crate::noise::NoiseStream;
use crate::toygan::data::DataSpec;
use crate::toygan::mlp::{BatchCache, MlpSpec};
use crate::toygan::train::{EvalLatents, Snapshot, TrainOutput};

/// Mean Euclidean distance between paired rows of two output batches.
pub(crate) fn mean_output_distance(a: &[f64], b: &[f64], dim: usize) -> f64 {
    let n = a.len() / dim;
    let mut total = 0.0;
    for s in 0..n {
        let mut d2 = 0.0;
        for k in 0..dim {
            let d = a[s * dim + k] - b[s * dim + k];
            d2 += d * d;
        }
        total += d2.sqrt();
    }
    total / n as f64
}

/// Shifting difference between two generator snapshots over their shared
/// latent batch: E_z ‖G1(z) − G2(z)‖.
pub fn shifting_difference(
    s1: &Snapshot,
    s2: &Snapshot,
    gen_spec: &MlpSpec,
    latents: &EvalLatents,
) -> Result<f64> {
    if s1.latents_id != latents.id || s2.latents_id != latents.id {
        return Err(Error::MismatchedLatents);
    }
    let n = latents.count();
    let mut cache = BatchCache::default();
    gen_spec.forward_batch(&s1.gen_params, &latents.z, n, &mut cache)?;
    let out1 = gen_spec.outputs(&cache).to_vec();
    gen_spec.forward_batch(&s2.gen_params, &latents.z, n, &mut cache)?;
    let out2 = gen_spec.outputs(&cache);
    Ok(mean_output_distance(&out1, out2, gen_spec.output))
}

/// Mean of the tail `fraction` of the run's snapshot-to-snapshot shifting
/// differences.
pub fn tail_mean_shifting_difference(output: &TrainOutput, fraction: f64) -> Result<f64> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "fraction must lie in (0, 1], got {fraction}"
        )));
    }
    let series = output.shifting_series();
    if series.is_empty() {
        return Err(Error::InvalidArgument(
            "run produced no shifting differences".into(),
        ));
    }
    let k = (((series.len() as f64) * fraction).ceil() as usize).max(1);
    let tail = &series[series.len() - k..];
    Ok(tail.iter().map(|(_, v)| v).sum::<f64>() / k as f64)
}

/// Energy distance between two samples of `dim`-dimensional points,
/// evaluated as the plug-in V-statistic
/// 2·mean‖x − y‖ − mean‖x − x′‖ − mean‖y − y′‖ (self-pairs included), which
/// is non-negative and vanishes iff the empirical distributions coincide.
pub fn energy_distance(xs: &[f64], ys: &[f64], dim: usize) -> f64 {
    assert!(dim > 0 && xs.len() % dim == 0 && ys.len() % dim == 0);
    let n = xs.len() / dim;
    let m = ys.len() / dim;
    if n == 0 || m == 0 {
        return 0.0;
    }
    let dist = |a: &[f64], i: usize, b: &[f64], j: usize| -> f64 {
        let mut d2 = 0.0;
        for k in 0..dim {
            let d = a[i * dim + k] - b[j * dim + k];
            d2 += d * d;
        }
        d2.sqrt()
    };
    let mut xy = 0.0;
    for i in 0..n {
        for j in 0..m {
            xy += dist(xs, i, ys, j);
        }
    }
    let mut xx = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            xx += dist(xs, i, xs, j);
        }
    }
    let mut yy = 0.0;
    for i in 0..m {
        for j in (i + 1)..m {
            yy += dist(ys, i, ys, j);
        }
    }
    2.0 * xy / (n as f64 * m as f64) - 2.0 * xx / (n as f64 * n as f64)
        - 2.0 * yy / (m as f64 * m as f64)
}

/// Sample-based energy distance between the generator's output distribution
/// and the target data distribution.
pub fn fit_metric(
    gen_spec: &MlpSpec,
    gen_params: &[f64],
    data: &DataSpec,
    n_samples: usize,
    stream: &mut NoiseStream,
) -> Result<f64> {
    if n_samples < 100 {
        return Err(Error::InvalidArgument(format!(
            "need at least 100 samples, got {n_samples}"
        )));
    }
    data.validate()?;
    if gen_spec.output != data.dim() {
        return Err(Error::ShapeMismatch {
            expected: data.dim(),
            actual: gen_spec.output,
        });
    }
    let mut z = Vec::with_capacity(n_samples * gen_spec.input);
    z.extend((0..n_samples * gen_spec.input).map(|_| stream.normal()));
    let mut cache = BatchCache::default();
    gen_spec.forward_batch(gen_params, &z, n_samples, &mut cache)?;
    let gen_out = gen_spec.outputs(&cache).to_vec();
    let mut data_out = Vec::with_capacity(n_samples * data.dim());
    data.sample_into(stream, n_samples, &mut data_out);
    Ok(energy_distance(&gen_out, &data_out, data.dim()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toygan::mlp::Activation;

    fn snapshot(step: u64, params: Vec<f64>, id: u64) -> Snapshot {
        Snapshot {
            step,
            gen_params: params,
            latents_id: id,
        }
    }

    fn latents(n: usize, dim: usize, seed: u64) -> EvalLatents {
        let z: Vec<f64> = {
            let mut s = NoiseStream::new(seed, 0);
            (0..n * dim).map(|_| s.normal()).collect()
        };
        EvalLatents { id: 42, dim, z }
    }

    #[test]
    fn identical_snapshots_have_zero_difference() {
        let spec = MlpSpec::new(2, vec![8], 1, Activation::Tanh).unwrap();
        let params = spec.init_params(&mut NoiseStream::new(1, 0));
        let lat = latents(16, 2, 3);
        let a = snapshot(0, params.clone(), 42);
        let b = snapshot(10, params, 42);
        assert_eq!(shifting_difference(&a, &b, &spec, &lat).unwrap(), 0.0);
    }

    #[test]
    fn output_bias_shift_gives_exactly_its_norm() {
        let spec = MlpSpec::new(2, vec![8], 2, Activation::Tanh).unwrap();
        let params = spec.init_params(&mut NoiseStream::new(2, 0));
        let mut shifted = params.clone();
        let range = spec.output_layer_range();
        // The last two entries are the output biases.
        shifted[range.end - 2] += 0.3;
        shifted[range.end - 1] -= 0.4;
        let lat = latents(32, 2, 4);
        let a = snapshot(0, params, 42);
        let b = snapshot(1, shifted, 42);
        let d = shifting_difference(&a, &b, &spec, &lat).unwrap();
        assert!((d - 0.5).abs() < 1e-12, "distance {d}");
    }

    #[test]
    fn mismatched_latents_rejected() {
        let spec = MlpSpec::new(2, vec![4], 1, Activation::Tanh).unwrap();
        let params = spec.init_params(&mut NoiseStream::new(1, 0));
        let lat = latents(8, 2, 5);
        let a = snapshot(0, params.clone(), 42);
        let b = snapshot(1, params, 43);
        assert!(matches!(
            shifting_difference(&a, &b, &spec, &lat),
            Err(Error::MismatchedLatents)
        ));
    }

    #[test]
    fn shifting_difference_is_a_pseudometric() {
        let spec = MlpSpec::new(2, vec![6], 1, Activation::Tanh).unwrap();
        let lat = latents(24, 2, 6);
        let mut s = NoiseStream::new(9, 0);
        for _ in 0..10 {
            let pa = spec.init_params(&mut s);
            let pb = spec.init_params(&mut s);
            let pc = spec.init_params(&mut s);
            let a = snapshot(0, pa, 42);
            let b = snapshot(1, pb, 42);
            let c = snapshot(2, pc, 42);
            let ab = shifting_difference(&a, &b, &spec, &lat).unwrap();
            let ba = shifting_difference(&b, &a, &spec, &lat).unwrap();
            let bc = shifting_difference(&b, &c, &spec, &lat).unwrap();
            let ac = shifting_difference(&a, &c, &spec, &lat).unwrap();
            assert!(ab >= 0.0);
            assert_eq!(ab, ba);
            assert!(ac <= ab + bc + 1e-12);
        }
    }

    #[test]
    fn energy_distance_same_distribution_near_zero() {
        // Copy oracle: two independent draws from the same distribution.
        let n = 10_000;
        let mut s = NoiseStream::new(11, 0);
        let xs: Vec<f64> = (0..n).map(|_| s.normal()).collect();
        let ys: Vec<f64> = (0..n).map(|_| s.normal()).collect();
        let d = energy_distance(&xs, &ys, 1);
        assert!(d >= 0.0);
        assert!(d < 0.05, "energy distance {d}");
    }

    #[test]
    fn energy_distance_point_mass_vs_standard_normal() {
        // Closed form for a point mass at 1: 2·E|1−Z| − E|Z−Z′|
        // = 2·1.16663… − 1.12838… ≈ 1.20488.
        let n = 4096;
        let mut s = NoiseStream::new(12, 0);
        let xs = vec![1.0; n];
        let ys: Vec<f64> = (0..n).map(|_| s.normal()).collect();
        let d = energy_distance(&xs, &ys, 1);
        assert!((d - 1.20488).abs() < 0.05, "energy distance {d}");
        assert!(d > 0.5);
    }

    #[test]
    fn energy_distance_is_symmetric() {
        let mut s = NoiseStream::new(13, 0);
        let xs: Vec<f64> = (0..200).map(|_| s.normal()).collect();
        let ys: Vec<f64> = (0..300).map(|_| 0.5 + s.normal()).collect();
        let (ab, ba) = (energy_distance(&xs, &ys, 1), energy_distance(&ys, &xs, 1));
        assert!((ab - ba).abs() <= 1e-12 * ab.abs().max(1.0), "{ab} vs {ba}");
    }

    #[test]
    fn fit_metric_flags_collapsed_generator() {
        // Zero weights with output bias 1: G ≡ 1 against gauss1d(0,1).
        let spec = MlpSpec::new(2, vec![4], 1, Activation::Tanh).unwrap();
        let mut params = vec![0.0; spec.param_count()];
        let range = spec.output_layer_range();
        params[range.end - 1] = 1.0;
        let mut s = NoiseStream::new(14, 0);
        let d = fit_metric(
            &spec,
            &params,
            &DataSpec::Gauss1d { mean: 0.0, std: 1.0 },
            4096,
            &mut s,
        )
        .unwrap();
        assert!(d > 0.5, "fit metric {d}");
    }

    #[test]
    fn fit_metric_requires_enough_samples() {
        let spec = MlpSpec::new(2, vec![4], 1, Activation::Tanh).unwrap();
        let params = vec![0.0; spec.param_count()];
        let mut s = NoiseStream::new(15, 0);
        assert!(fit_metric(
            &spec,
            &params,
            &DataSpec::Gauss1d { mean: 0.0, std: 1.0 },
            99,
            &mut s
        )
        .is_err());
    }
}
