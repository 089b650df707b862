use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::config::ModelConfig;
use crate::model::layers::{
    tanh_in_place, ConvCache, DenseCache, FeatureMap, GenerativeDenseLayer, OperationalConvLayer,
};
use crate::real::Real;
use crate::signal::Segment;

/// Learnable values of a network, one block per layer.
///
/// Immutable once built; the forward pass takes `&self` and can run from many
/// threads at once.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParameters<T> {
    pub config: ModelConfig,
    pub op_layers: Vec<OperationalConvLayer<T>>,
    pub dense: GenerativeDenseLayer<T>,
    pub output: GenerativeDenseLayer<T>,
}

/// Gradients share the parameter layout.
pub type GradientSet<T> = ModelParameters<T>;

/// Activations recorded during a forward pass.
#[derive(Debug, Clone)]
pub struct ForwardTrace<T> {
    pub(crate) conv_caches: Vec<ConvCache<T>>,
    /// Post-tanh output of every operational layer.
    pub(crate) conv_outputs: Vec<FeatureMap<T>>,
    pub(crate) dense_cache: DenseCache<T>,
    pub(crate) dense_output: Vec<T>,
    pub(crate) output_cache: DenseCache<T>,
    pub outputs: Vec<T>,
}

impl<T: Real> ModelParameters<T> {
    /// All weights and biases zero.
    pub fn zeros(config: &ModelConfig) -> Result<Self> {
        config.validate()?;
        let q = config.q_order;
        let mut inp = 1;
        let op_layers = config
            .op_layers
            .iter()
            .map(|spec| {
                let layer = OperationalConvLayer::zeros(
                    inp,
                    spec.out_neurons,
                    spec.kernel_size,
                    q,
                    spec.stride,
                );
                inp = spec.out_neurons;
                layer
            })
            .collect();
        Ok(Self {
            config: config.clone(),
            op_layers,
            dense: GenerativeDenseLayer::zeros(config.flatten_width(), config.dense_width, q),
            output: GenerativeDenseLayer::zeros(config.dense_width, config.output_classes, q),
        })
    }

    /// Glorot-uniform weights, zero biases. Each weight is drawn from
    /// `U(-a, a)` with `a = sqrt(6 / (fan_in + fan_out))`, where
    /// `fan_in = in*K*Q` and `fan_out = out*K*Q` (`K = 1` for dense layers).
    ///
    /// Draws are made in `f64` so both numeric modes see the same values.
    pub fn init(config: &ModelConfig, seed: u64) -> Result<Self> {
        let mut params = Self::zeros(config)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = config.q_order;
        let mut fill = |weights: &mut [T], fan_in: usize, fan_out: usize| {
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for w in weights {
                *w = T::from_f64(rng.gen_range(-bound..bound));
            }
        };
        for layer in &mut params.op_layers {
            let kq = layer.kernel_size * q;
            fill(
                &mut layer.weights,
                layer.in_neurons * kq,
                layer.out_neurons * kq,
            );
        }
        for layer in [&mut params.dense, &mut params.output] {
            fill(
                &mut layer.weights,
                layer.in_features * q,
                layer.out_features * q,
            );
        }
        Ok(params)
    }

    /// Bound used by [`init`](Self::init) for each layer, in block order
    /// (operational layers, dense, output).
    pub fn init_bounds(config: &ModelConfig) -> Vec<f64> {
        let q = config.q_order;
        let mut inp = 1;
        let mut out = Vec::new();
        for spec in &config.op_layers {
            let kq = spec.kernel_size * q;
            out.push((6.0 / ((inp + spec.out_neurons) * kq) as f64).sqrt());
            inp = spec.out_neurons;
        }
        out.push((6.0 / ((config.flatten_width() + config.dense_width) * q) as f64).sqrt());
        out.push((6.0 / ((config.dense_width + config.output_classes) * q) as f64).sqrt());
        out
    }

    pub fn param_count(&self) -> usize {
        self.op_layers
            .iter()
            .map(|l| l.param_count())
            .sum::<usize>()
            + self.dense.param_count()
            + self.output.param_count()
    }

    /// Weight and bias slices in serialization order: for each layer, weights then biases.
    pub fn blocks(&self) -> Vec<&[T]> {
        let mut out: Vec<&[T]> = Vec::with_capacity(2 * (self.op_layers.len() + 2));
        for l in &self.op_layers {
            out.push(&l.weights);
            out.push(&l.biases);
        }
        out.push(&self.dense.weights);
        out.push(&self.dense.biases);
        out.push(&self.output.weights);
        out.push(&self.output.biases);
        out
    }

    pub fn blocks_mut(&mut self) -> Vec<&mut [T]> {
        let mut out: Vec<&mut [T]> = Vec::with_capacity(2 * (self.op_layers.len() + 2));
        for l in &mut self.op_layers {
            out.push(&mut l.weights);
            out.push(&mut l.biases);
        }
        out.push(&mut self.dense.weights);
        out.push(&mut self.dense.biases);
        out.push(&mut self.output.weights);
        out.push(&mut self.output.biases);
        out
    }

    /// Same structure with every value zero.
    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        for b in z.blocks_mut() {
            b.fill(T::zero());
        }
        z
    }

    /// Converts every value to another numeric mode.
    pub fn cast<U: Real>(&self) -> ModelParameters<U> {
        let conv = |v: &[T]| {
            v.iter()
                .map(|x| U::from_f64(x.as_f64()))
                .collect::<Vec<U>>()
        };
        let dense = |l: &GenerativeDenseLayer<T>| GenerativeDenseLayer {
            in_features: l.in_features,
            out_features: l.out_features,
            q_order: l.q_order,
            weights: conv(&l.weights),
            biases: conv(&l.biases),
        };
        ModelParameters {
            config: self.config.clone(),
            op_layers: self
                .op_layers
                .iter()
                .map(|l| OperationalConvLayer {
                    in_neurons: l.in_neurons,
                    out_neurons: l.out_neurons,
                    kernel_size: l.kernel_size,
                    q_order: l.q_order,
                    stride: l.stride,
                    padding: l.padding,
                    weights: conv(&l.weights),
                    biases: conv(&l.biases),
                })
                .collect(),
            dense: dense(&self.dense),
            output: dense(&self.output),
        }
    }

    /// Checks that every block has the shape `config` implies.
    pub fn check_config(&self, config: &ModelConfig) -> Result<()> {
        if &self.config != config {
            return Err(Error::Shape(format!(
                "parameters were built for {:?}, not {:?}",
                self.config, config
            )));
        }
        let expected = Self::zeros(config)?;
        let ours = self.blocks();
        let theirs = expected.blocks();
        if ours.len() != theirs.len() || ours.iter().zip(&theirs).any(|(a, b)| a.len() != b.len()) {
            return Err(Error::Shape(
                "parameter blocks do not match the configuration".into(),
            ));
        }
        Ok(())
    }

    /// Network outputs for one input signal.
    pub fn forward(&self, input: &[T]) -> Result<Vec<T>> {
        let mut map = self.check_input(input)?;
        for layer in &self.op_layers {
            map = layer.forward(&map)?;
            tanh_in_place(&mut map.values);
        }
        let mut hidden = self.dense.forward(&map.values)?;
        tanh_in_place(&mut hidden);
        let mut out = self.output.forward(&hidden)?;
        tanh_in_place(&mut out);
        Ok(out)
    }

    /// Forward pass on a normalized segment.
    pub fn forward_segment(&self, segment: &Segment) -> Result<Vec<T>> {
        let input: Vec<T> = segment
            .values
            .iter()
            .map(|&v| T::from_f64(v as f64))
            .collect();
        self.forward(&input)
    }

    /// Forward pass keeping every intermediate needed for backpropagation.
    pub fn forward_trace(&self, input: &[T]) -> Result<ForwardTrace<T>> {
        let mut map = self.check_input(input)?;
        let mut conv_caches = Vec::with_capacity(self.op_layers.len());
        let mut conv_outputs = Vec::with_capacity(self.op_layers.len());
        for layer in &self.op_layers {
            let (mut out, cache) = layer.forward_cached(&map)?;
            tanh_in_place(&mut out.values);
            conv_caches.push(cache);
            conv_outputs.push(out.clone());
            map = out;
        }
        let (mut hidden, dense_cache) = self.dense.forward_cached(&map.values)?;
        tanh_in_place(&mut hidden);
        let (mut outputs, output_cache) = self.output.forward_cached(&hidden)?;
        tanh_in_place(&mut outputs);
        Ok(ForwardTrace {
            conv_caches,
            conv_outputs,
            dense_cache,
            dense_output: hidden,
            output_cache,
            outputs,
        })
    }

    fn check_input(&self, input: &[T]) -> Result<FeatureMap<T>> {
        if input.len() != self.config.input_length {
            return Err(Error::Shape(format!(
                "model expects {} input samples, got {}",
                self.config.input_length,
                input.len()
            )));
        }
        Ok(FeatureMap::signal(input.to_vec()))
    }
}
