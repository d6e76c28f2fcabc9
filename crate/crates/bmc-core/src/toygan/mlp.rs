//! Dense multilayer perceptron over a flat parameter vector, with
//! hand-written batched backpropagation.
//!
//! Parameter layout, fixed and relied on by snapshot persistence: layers in
//! input→output order; for each layer the weight matrix in row-major
//! (fan_out × fan_in) order followed by the fan_out biases. Hidden layers
//! apply the configured activation; the output layer is identity.
//!
//! Batched gradients are means over the batch: for a scalar objective
//! L = (1/n)·Σᵢ Σₖ upstreamᵢₖ·yᵢₖ, `backward_batch` returns ∂L/∂params.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::NoiseStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Tanh,
    Relu,
}

/// Dot product with four independent accumulators. The evaluation order is
/// fixed, so results stay bit-reproducible.
#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for k in 0..chunks {
        let i = 4 * k;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut tail = 0.0;
    for i in 4 * chunks..a.len() {
        tail += a[i] * b[i];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

impl Activation {
    #[inline]
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => x.tanh(),
            Activation::Relu => x.max(0.0),
        }
    }

    /// Derivative expressed through the post-activation value.
    #[inline]
    fn derivative(self, post: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - post * post,
            Activation::Relu => {
                if post > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// Architecture of a dense network: layer widths plus hidden activation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpSpec {
    pub input: usize,
    pub hidden: Vec<usize>,
    pub output: usize,
    pub activation: Activation,
}

impl MlpSpec {
    pub fn new(input: usize, hidden: Vec<usize>, output: usize, activation: Activation) -> Result<Self> {
        let spec = Self {
            input,
            hidden,
            output,
            activation,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.input == 0 || self.output == 0 || self.hidden.iter().any(|&w| w == 0) {
            return Err(Error::InvalidArgument(
                "all layer widths must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// (fan_in, fan_out) of each layer in order.
    pub fn layer_dims(&self) -> Vec<(usize, usize)> {
        let widths: Vec<usize> = std::iter::once(self.input)
            .chain(self.hidden.iter().copied())
            .chain(std::iter::once(self.output))
            .collect();
        widths.windows(2).map(|w| (w[0], w[1])).collect()
    }

    /// Σ (fan_in + 1) · fan_out.
    pub fn param_count(&self) -> usize {
        self.layer_dims()
            .iter()
            .map(|(fi, fo)| (fi + 1) * fo)
            .sum()
    }

    /// Weights drawn from N(0, 1/fan_in), biases zero.
    pub fn init_params(&self, stream: &mut NoiseStream) -> Vec<f64> {
        let mut params = Vec::with_capacity(self.param_count());
        for (fan_in, fan_out) in self.layer_dims() {
            let scale = 1.0 / (fan_in as f64).sqrt();
            for _ in 0..fan_in * fan_out {
                params.push(scale * stream.normal());
            }
            params.extend(std::iter::repeat(0.0).take(fan_out));
        }
        params
    }

    /// Offset of the final layer's parameters (weights then biases) within
    /// the flat vector.
    pub fn output_layer_range(&self) -> std::ops::Range<usize> {
        let dims = self.layer_dims();
        let before: usize = dims[..dims.len() - 1]
            .iter()
            .map(|(fi, fo)| (fi + 1) * fo)
            .sum();
        before..self.param_count()
    }

    fn check_params(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.param_count() {
            return Err(Error::ShapeMismatch {
                expected: self.param_count(),
                actual: params.len(),
            });
        }
        Ok(())
    }

    fn check_batch(&self, inputs: &[f64], n: usize) -> Result<()> {
        if inputs.len() != n * self.input {
            return Err(Error::ShapeMismatch {
                expected: n * self.input,
                actual: inputs.len(),
            });
        }
        Ok(())
    }

    /// Forward pass over a row-major batch of `n` samples, caching every
    /// layer's post-activations for a subsequent backward pass.
    pub fn forward_batch(
        &self,
        params: &[f64],
        inputs: &[f64],
        n: usize,
        cache: &mut BatchCache,
    ) -> Result<()> {
        self.check_params(params)?;
        self.check_batch(inputs, n)?;
        let dims = self.layer_dims();
        cache.layer_outputs.resize(dims.len(), Vec::new());
        let mut offset = 0usize;
        for (l, &(fan_in, fan_out)) in dims.iter().enumerate() {
            let weights = &params[offset..offset + fan_in * fan_out];
            let biases = &params[offset + fan_in * fan_out..offset + (fan_in + 1) * fan_out];
            offset += (fan_in + 1) * fan_out;
            let is_output = l == dims.len() - 1;

            let (prev_slice, out) = if l == 0 {
                let out = &mut cache.layer_outputs[l];
                (inputs, out)
            } else {
                let (a, b) = cache.layer_outputs.split_at_mut(l);
                (a[l - 1].as_slice(), &mut b[0])
            };
            out.clear();
            out.resize(n * fan_out, 0.0);
            for s in 0..n {
                let x = &prev_slice[s * fan_in..(s + 1) * fan_in];
                let y = &mut out[s * fan_out..(s + 1) * fan_out];
                for o in 0..fan_out {
                    let row = &weights[o * fan_in..(o + 1) * fan_in];
                    let acc = biases[o] + dot(row, x);
                    y[o] = if is_output {
                        acc
                    } else {
                        self.activation.apply(acc)
                    };
                }
            }
        }
        Ok(())
    }

    /// Batch outputs after [`Self::forward_batch`].
    pub fn outputs<'a>(&self, cache: &'a BatchCache) -> &'a [f64] {
        cache.layer_outputs.last().expect("forward_batch not run")
    }

    /// Backpropagates `upstream` (n × output, ∂L/∂y per sample) through the
    /// cached forward pass. Accumulates mean-over-batch parameter gradients
    /// into `param_grads` (callers zero the buffer) and, when requested,
    /// writes per-sample input gradients into `input_grads` (n × input, not
    /// averaged).
    pub fn backward_batch(
        &self,
        params: &[f64],
        inputs: &[f64],
        n: usize,
        cache: &mut BatchCache,
        upstream: &[f64],
        mut param_grads: Option<&mut [f64]>,
        mut input_grads: Option<&mut [f64]>,
    ) -> Result<()> {
        self.check_params(params)?;
        self.check_batch(inputs, n)?;
        if upstream.len() != n * self.output {
            return Err(Error::ShapeMismatch {
                expected: n * self.output,
                actual: upstream.len(),
            });
        }
        if let Some(ref pg) = param_grads {
            if pg.len() != self.param_count() {
                return Err(Error::ShapeMismatch {
                    expected: self.param_count(),
                    actual: pg.len(),
                });
            }
        }
        if let Some(ref ig) = input_grads {
            if ig.len() != n * self.input {
                return Err(Error::ShapeMismatch {
                    expected: n * self.input,
                    actual: ig.len(),
                });
            }
        }

        let dims = self.layer_dims();
        let mut offsets = Vec::with_capacity(dims.len());
        let mut off = 0usize;
        for &(fi, fo) in &dims {
            offsets.push(off);
            off += (fi + 1) * fo;
        }

        let inv_n = 1.0 / n as f64;
        cache.delta.clear();
        cache.delta.extend_from_slice(upstream);
        for l in (0..dims.len()).rev() {
            let (fan_in, fan_out) = dims[l];
            let offset = offsets[l];
            let weights = &params[offset..offset + fan_in * fan_out];

            let prev: &[f64] = if l == 0 {
                inputs
            } else {
                &cache.layer_outputs[l - 1]
            };

            // Parameter gradients for this layer.
            if let Some(pg) = param_grads.as_deref_mut() {
                let (w_grads, b_grads) =
                    pg[offset..offset + (fan_in + 1) * fan_out].split_at_mut(fan_in * fan_out);
                for s in 0..n {
                    let d = &cache.delta[s * fan_out..(s + 1) * fan_out];
                    let x = &prev[s * fan_in..(s + 1) * fan_in];
                    for o in 0..fan_out {
                        let g = d[o] * inv_n;
                        let row = &mut w_grads[o * fan_in..(o + 1) * fan_in];
                        for i in 0..fan_in {
                            row[i] += g * x[i];
                        }
                        b_grads[o] += g;
                    }
                }
            }

            // Delta for the previous layer (or input gradients at l == 0).
            if l == 0 {
                if let Some(ig) = input_grads.as_deref_mut() {
                    for s in 0..n {
                        let d = &cache.delta[s * fan_out..(s + 1) * fan_out];
                        let gi = &mut ig[s * fan_in..(s + 1) * fan_in];
                        gi.fill(0.0);
                        for o in 0..fan_out {
                            let w = &weights[o * fan_in..(o + 1) * fan_in];
                            let dv = d[o];
                            for i in 0..fan_in {
                                gi[i] += dv * w[i];
                            }
                        }
                    }
                }
            } else {
                cache.next_delta.clear();
                cache.next_delta.resize(n * fan_in, 0.0);
                let post = &cache.layer_outputs[l - 1];
                for s in 0..n {
                    let d = &cache.delta[s * fan_out..(s + 1) * fan_out];
                    let nd = &mut cache.next_delta[s * fan_in..(s + 1) * fan_in];
                    for o in 0..fan_out {
                        let w = &weights[o * fan_in..(o + 1) * fan_in];
                        let dv = d[o];
                        for i in 0..fan_in {
                            nd[i] += dv * w[i];
                        }
                    }
                    let a = &post[s * fan_in..(s + 1) * fan_in];
                    for i in 0..fan_in {
                        nd[i] *= self.activation.derivative(a[i]);
                    }
                }
                std::mem::swap(&mut cache.delta, &mut cache.next_delta);
            }
        }
        Ok(())
    }

    /// Convenience single-call API: returns (outputs, mean parameter
    /// gradients, per-sample input gradients).
    pub fn forward_backward(
        &self,
        params: &[f64],
        inputs: &[f64],
        n: usize,
        upstream: &[f64],
    ) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        let mut cache = BatchCache::default();
        self.forward_batch(params, inputs, n, &mut cache)?;
        let outputs = self.outputs(&cache).to_vec();
        let mut param_grads = vec![0.0; self.param_count()];
        let mut input_grads = vec![0.0; n * self.input];
        self.backward_batch(
            params,
            inputs,
            n,
            &mut cache,
            upstream,
            Some(&mut param_grads),
            Some(&mut input_grads),
        )?;
        Ok((outputs, param_grads, input_grads))
    }
}

/// Reusable forward/backward scratch buffers.
#[derive(Debug, Clone, Default)]
pub struct BatchCache {
    layer_outputs: Vec<Vec<f64>>,
    delta: Vec<f64>,
    next_delta: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tanh_net() -> MlpSpec {
        MlpSpec::new(2, vec![16], 1, Activation::Tanh).unwrap()
    }

    #[test]
    fn param_count_matches_layout() {
        let spec = MlpSpec::new(2, vec![32, 32], 1, Activation::Tanh).unwrap();
        assert_eq!(spec.param_count(), 3 * 32 + 33 * 32 + 33);
        let stream = &mut NoiseStream::new(0, 0);
        assert_eq!(spec.init_params(stream).len(), spec.param_count());
    }

    #[test]
    fn zero_network_outputs_zero_and_bias_grads_are_upstream_means() {
        let spec = tanh_net();
        let params = vec![0.0; spec.param_count()];
        let inputs = [0.3, -0.7, 1.5, 0.2, -0.1, 0.9];
        let upstream = [2.0, -1.0, 5.0];
        let (out, grads, _) = spec
            .forward_backward(&params, &inputs, 3, &upstream)
            .unwrap();
        assert!(out.iter().all(|&y| y == 0.0));
        // Output-layer bias gradient = mean upstream; all other grads vanish
        // because zero weights block every other path.
        let out_range = spec.output_layer_range();
        let bias_idx = out_range.end - 1;
        let mean_upstream = (2.0 - 1.0 + 5.0) / 3.0;
        assert!((grads[bias_idx] - mean_upstream).abs() < 1e-15);
        for (i, g) in grads.iter().enumerate() {
            if i != bias_idx {
                assert_eq!(*g, 0.0, "grad {i} should vanish");
            }
        }
    }

    #[test]
    fn single_linear_layer_weight_grad_is_mean_input() {
        // y = Wx + b with unit upstream: ∂mean(y)/∂W_{0i} = mean of input i.
        let spec = MlpSpec::new(3, vec![], 1, Activation::Tanh).unwrap();
        let mut stream = NoiseStream::new(5, 0);
        let params = spec.init_params(&mut stream);
        let inputs: Vec<f64> = (0..12).map(|_| stream.normal()).collect();
        let upstream = [1.0; 4];
        let (_, grads, _) = spec
            .forward_backward(&params, &inputs, 4, &upstream)
            .unwrap();
        for i in 0..3 {
            let mean_i = (0..4).map(|s| inputs[s * 3 + i]).sum::<f64>() / 4.0;
            assert!((grads[i] - mean_i).abs() < 1e-15);
        }
        assert!((grads[3] - 1.0).abs() < 1e-15); // bias
    }

    fn finite_difference(
        spec: &MlpSpec,
        params: &[f64],
        inputs: &[f64],
        n: usize,
        upstream: &[f64],
        coord: usize,
        h: f64,
    ) -> f64 {
        let eval = |p: &[f64]| {
            let mut cache = BatchCache::default();
            spec.forward_batch(p, inputs, n, &mut cache).unwrap();
            let out = spec.outputs(&cache);
            out.iter()
                .zip(upstream)
                .map(|(y, u)| y * u)
                .sum::<f64>()
                / n as f64
        };
        let mut plus = params.to_vec();
        plus[coord] += h;
        let mut minus = params.to_vec();
        minus[coord] -= h;
        (eval(&plus) - eval(&minus)) / (2.0 * h)
    }

    #[test]
    fn analytic_gradients_match_central_differences() {
        // Random 2-16-1 tanh net, 50 random coordinates, step 1e−5,
        // relative tolerance 1e−6.
        let spec = tanh_net();
        let mut stream = NoiseStream::new(1234, 0);
        let params = spec.init_params(&mut stream);
        let n = 8;
        let inputs: Vec<f64> = (0..n * 2).map(|_| stream.normal()).collect();
        let upstream: Vec<f64> = (0..n).map(|_| stream.normal()).collect();
        let (_, grads, _) = spec
            .forward_backward(&params, &inputs, n, &upstream)
            .unwrap();
        for _ in 0..50 {
            let coord = (stream.uniform() * spec.param_count() as f64) as usize;
            let fd = finite_difference(&spec, &params, &inputs, n, &upstream, coord, 1e-5);
            let a = grads[coord];
            let denom = a.abs().max(fd.abs());
            assert!(
                (a - fd).abs() <= 1e-6 * denom.max(1e-9),
                "coord {coord}: analytic {a} vs fd {fd}"
            );
        }
    }

    #[test]
    fn input_gradients_match_central_differences() {
        let spec = MlpSpec::new(2, vec![8, 8], 2, Activation::Tanh).unwrap();
        let mut stream = NoiseStream::new(77, 0);
        let params = spec.init_params(&mut stream);
        let n = 4;
        let inputs: Vec<f64> = (0..n * 2).map(|_| stream.normal()).collect();
        let upstream: Vec<f64> = (0..n * 2).map(|_| stream.normal()).collect();
        let (_, _, igrads) = spec
            .forward_backward(&params, &inputs, n, &upstream)
            .unwrap();
        let eval = |xs: &[f64]| {
            let mut cache = BatchCache::default();
            spec.forward_batch(&params, xs, n, &mut cache).unwrap();
            spec.outputs(&cache)
                .iter()
                .zip(&upstream)
                .map(|(y, u)| y * u)
                .sum::<f64>()
        };
        for coord in 0..n * 2 {
            let h = 1e-5;
            let mut plus = inputs.clone();
            plus[coord] += h;
            let mut minus = inputs.clone();
            minus[coord] -= h;
            let fd = (eval(&plus) - eval(&minus)) / (2.0 * h);
            // Input gradients are per-sample (not averaged).
            let a = igrads[coord];
            assert!(
                (a - fd).abs() <= 1e-6 * a.abs().max(fd.abs()).max(1e-9),
                "coord {coord}: {a} vs {fd}"
            );
        }
    }

    #[test]
    fn relu_forward_and_gradient() {
        let spec = MlpSpec::new(1, vec![4], 1, Activation::Relu).unwrap();
        let mut stream = NoiseStream::new(3, 0);
        let params = spec.init_params(&mut stream);
        let inputs = [0.5, -1.0, 2.0];
        let upstream = [1.0, 1.0, 1.0];
        let (_, grads, _) = spec
            .forward_backward(&params, &inputs, 3, &upstream)
            .unwrap();
        for coord in 0..spec.param_count() {
            let fd = finite_difference(&spec, &params, &inputs, 3, &upstream, coord, 1e-6);
            assert!(
                (grads[coord] - fd).abs() <= 1e-5 * grads[coord].abs().max(fd.abs()).max(1e-6),
                "coord {coord}: {} vs {fd}",
                grads[coord]
            );
        }
    }

    #[test]
    fn shape_mismatches_are_rejected() {
        let spec = tanh_net();
        let params = vec![0.0; spec.param_count()];
        let bad_params = vec![0.0; spec.param_count() - 1];
        let inputs = [0.0; 4];
        let upstream = [1.0, 1.0];
        assert!(matches!(
            spec.forward_backward(&bad_params, &inputs, 2, &upstream),
            Err(Error::ShapeMismatch { .. })
        ));
        assert!(matches!(
            spec.forward_backward(&params, &inputs[..3], 2, &upstream),
            Err(Error::ShapeMismatch { .. })
        ));
        assert!(matches!(
            spec.forward_backward(&params, &inputs, 2, &upstream[..1]),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn widths_must_be_positive() {
        assert!(MlpSpec::new(0, vec![4], 1, Activation::Tanh).is_err());
        assert!(MlpSpec::new(2, vec![0], 1, Activation::Tanh).is_err());
    }
}
