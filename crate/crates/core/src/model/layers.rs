//! Generative-neuron layers.
//!
//! Every kernel element of an operational layer applies a learned polynomial
//! `w(r,1) y + w(r,2) y^2 + ... + w(r,Q) y^Q` to its input sample instead of a
//! single multiplication. The constant term lives in the per-neuron bias.
//! Because the polynomial is linear in its weights, a layer is evaluated as
//! `Q` ordinary cross-correlations over the elementwise powers of its input.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;

/// Multi-channel 1D activation map stored channel-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap<T> {
    pub channels: usize,
    pub length: usize,
    pub values: Vec<T>,
}

impl<T: Real> FeatureMap<T> {
    pub fn zeros(channels: usize, length: usize) -> Self {
        Self {
            channels,
            length,
            values: vec![T::zero(); channels * length],
        }
    }

    pub fn from_values(channels: usize, length: usize, values: Vec<T>) -> Result<Self> {
        if values.len() != channels * length {
            return Err(Error::Shape(format!(
                "feature map {channels}x{length} needs {} values, got {}",
                channels * length,
                values.len()
            )));
        }
        Ok(Self {
            channels,
            length,
            values,
        })
    }

    /// Single-channel map over `values`.
    pub fn signal(values: Vec<T>) -> Self {
        Self {
            channels: 1,
            length: values.len(),
            values,
        }
    }

    pub fn channel(&self, c: usize) -> &[T] {
        &self.values[c * self.length..(c + 1) * self.length]
    }

    pub fn channel_mut(&mut self, c: usize) -> &mut [T] {
        &mut self.values[c * self.length..(c + 1) * self.length]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// Elementwise powers `y^1 ..= y^q_order` of `map`.
pub fn raise_to_powers<T: Real>(map: &FeatureMap<T>, q_order: usize) -> Vec<FeatureMap<T>> {
    let mut out: Vec<FeatureMap<T>> = Vec::with_capacity(q_order);
    for q in 0..q_order {
        let values = if q == 0 {
            map.values.clone()
        } else {
            out[q - 1]
                .values
                .iter()
                .zip(&map.values)
                .map(|(&p, &y)| p * y)
                .collect()
        };
        out.push(FeatureMap {
            channels: map.channels,
            length: map.length,
            values,
        });
    }
    out
}

/// Elementwise hyperbolic tangent, in place.
pub fn tanh_in_place<T: Real>(values: &mut [T]) {
    for v in values {
        *v = v.tanh();
    }
}

/// Elementwise hyperbolic tangent.
pub fn tanh_apply<T: Real>(values: &[T]) -> Vec<T> {
    values.iter().map(|v| v.tanh()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Padding {
    /// Zero padding with output length `ceil(L / stride)` and `floor((K-1)/2)` leading zeros.
    #[default]
    Same,
    /// No padding; output length `floor((L - K) / stride) + 1`.
    Valid,
}

impl Padding {
    pub fn left(self, kernel_size: usize) -> usize {
        match self {
            Padding::Same => (kernel_size - 1) / 2,
            Padding::Valid => 0,
        }
    }

    pub fn output_len(self, input_len: usize, kernel_size: usize, stride: usize) -> usize {
        match self {
            Padding::Same => input_len.div_ceil(stride),
            Padding::Valid if input_len >= kernel_size => (input_len - kernel_size) / stride + 1,
            Padding::Valid => 0,
        }
    }
}

/// Zero-padded input powers split into `stride` phases so that every tap of a
/// strided correlation reads a contiguous run.
///
/// `phase(i, q, p)[t]` holds `y_i(t * stride + p - pad_left)^q`, zero outside the input.
#[derive(Debug, Clone)]
pub struct PowerStack<T> {
    q_order: usize,
    stride: usize,
    phase_len: usize,
    data: Vec<T>,
}

impl<T: Real> PowerStack<T> {
    fn zeros(channels: usize, q_order: usize, stride: usize, phase_len: usize) -> Self {
        Self {
            q_order,
            stride,
            phase_len,
            data: vec![T::zero(); channels * q_order * stride * phase_len],
        }
    }

    fn build(
        input: &FeatureMap<T>,
        q_order: usize,
        stride: usize,
        pad_left: usize,
        phase_len: usize,
    ) -> Self {
        let mut stack = Self::zeros(input.channels, q_order, stride, phase_len);
        let padded_len = stride * phase_len;
        for i in 0..input.channels {
            let y = input.channel(i);
            for j in 0..padded_len {
                let Some(n) = j.checked_sub(pad_left) else {
                    continue;
                };
                if n >= y.len() {
                    break;
                }
                let (t, p) = (j / stride, j % stride);
                let x = y[n];
                let mut pw = x;
                for q in 0..q_order {
                    if q > 0 {
                        pw *= x;
                    }
                    let at = stack.offset(i, q, p) + t;
                    stack.data[at] = pw;
                }
            }
        }
        stack
    }

    #[inline]
    fn offset(&self, i: usize, q: usize, p: usize) -> usize {
        ((i * self.q_order + q) * self.stride + p) * self.phase_len
    }

    #[inline]
    fn phase(&self, i: usize, q: usize, p: usize) -> &[T] {
        let o = self.offset(i, q, p);
        &self.data[o..o + self.phase_len]
    }

    #[inline]
    fn phase_mut(&mut self, i: usize, q: usize, p: usize) -> &mut [T] {
        let o = self.offset(i, q, p);
        &mut self.data[o..o + self.phase_len]
    }
}

/// Operational (generative-neuron) 1D convolution layer.
///
/// Weights are indexed `[out][in][r][q]` with `r` the kernel tap and `q` the
/// power (stored at `q - 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct OperationalConvLayer<T> {
    pub in_neurons: usize,
    pub out_neurons: usize,
    pub kernel_size: usize,
    pub q_order: usize,
    pub stride: usize,
    pub padding: Padding,
    pub weights: Vec<T>,
    pub biases: Vec<T>,
}

/// Intermediate values of one operational layer kept for backpropagation.
#[derive(Debug, Clone)]
pub struct ConvCache<T> {
    input: FeatureMap<T>,
    powers: PowerStack<T>,
    output_len: usize,
}

impl<T: Real> OperationalConvLayer<T> {
    pub fn zeros(
        in_neurons: usize,
        out_neurons: usize,
        kernel_size: usize,
        q_order: usize,
        stride: usize,
    ) -> Self {
        Self {
            in_neurons,
            out_neurons,
            kernel_size,
            q_order,
            stride,
            padding: Padding::Same,
            weights: vec![T::zero(); out_neurons * in_neurons * kernel_size * q_order],
            biases: vec![T::zero(); out_neurons],
        }
    }

    pub fn with_padding(mut self, padding: Padding) -> Self {
        self.padding = padding;
        self
    }

    /// Index of `w[out][inp][r][q]` with `q` in `1..=Q`.
    #[inline]
    pub fn weight_index(&self, out: usize, inp: usize, r: usize, q: usize) -> usize {
        debug_assert!(q >= 1 && q <= self.q_order);
        ((out * self.in_neurons + inp) * self.kernel_size + r) * self.q_order + (q - 1)
    }

    pub fn weight(&self, out: usize, inp: usize, r: usize, q: usize) -> T {
        self.weights[self.weight_index(out, inp, r, q)]
    }

    pub fn set_weight(&mut self, out: usize, inp: usize, r: usize, q: usize, v: T) {
        let at = self.weight_index(out, inp, r, q);
        self.weights[at] = v;
    }

    pub fn output_len(&self, input_len: usize) -> usize {
        self.padding
            .output_len(input_len, self.kernel_size, self.stride)
    }

    pub fn param_count(&self) -> usize {
        self.weights.len() + self.biases.len()
    }

    fn check_shape(&self) -> Result<()> {
        let expected = self.out_neurons * self.in_neurons * self.kernel_size * self.q_order;
        if self.weights.len() != expected || self.biases.len() != self.out_neurons {
            return Err(Error::Shape(format!(
                "operational layer {}->{} K={} Q={} needs {expected} weights and {} biases, has {} and {}",
                self.in_neurons,
                self.out_neurons,
                self.kernel_size,
                self.q_order,
                self.out_neurons,
                self.weights.len(),
                self.biases.len()
            )));
        }
        if self.q_order == 0 || self.kernel_size == 0 || self.stride == 0 {
            return Err(Error::Shape(
                "kernel size, Q and stride must be positive".into(),
            ));
        }
        Ok(())
    }

    fn check_input(&self, input: &FeatureMap<T>) -> Result<()> {
        self.check_shape()?;
        if input.channels != self.in_neurons {
            return Err(Error::Shape(format!(
                "layer expects {} input channels, got {}",
                self.in_neurons, input.channels
            )));
        }
        Ok(())
    }

    /// Literal evaluation of the nodal double sum per output sample:
    /// `x_k(m) = b_k + sum_i sum_r sum_q w_ik(r,q) * y_i(m*S + r - pad)^q`.
    ///
    /// Reference path for checking [`forward`](Self::forward); not used by the network.
    pub fn forward_direct(&self, input: &FeatureMap<T>) -> Result<FeatureMap<T>> {
        self.check_input(input)?;
        let out_len = self.output_len(input.length);
        let pad = self.padding.left(self.kernel_size) as isize;
        let mut out = FeatureMap::zeros(self.out_neurons, out_len);
        for k in 0..self.out_neurons {
            for m in 0..out_len {
                let mut acc = T::zero();
                for i in 0..self.in_neurons {
                    let y = input.channel(i);
                    for r in 0..self.kernel_size {
                        let n = (m * self.stride + r) as isize - pad;
                        if n < 0 || n as usize >= y.len() {
                            continue;
                        }
                        let v = y[n as usize];
                        for q in 1..=self.q_order {
                            acc += self.weight(k, i, r, q) * v.powi(q as i32);
                        }
                    }
                }
                out.values[k * out_len + m] = acc + self.biases[k];
            }
        }
        Ok(out)
    }

    /// Pre-activation output computed as `Q` correlations over input powers.
    pub fn forward(&self, input: &FeatureMap<T>) -> Result<FeatureMap<T>> {
        self.forward_cached(input).map(|(out, _)| out)
    }

    /// As [`forward`](Self::forward), also returning what [`backward`](Self::backward) needs.
    pub fn forward_cached(&self, input: &FeatureMap<T>) -> Result<(FeatureMap<T>, ConvCache<T>)> {
        self.check_input(input)?;
        let out_len = self.output_len(input.length);
        let s = self.stride;
        let phase_len = out_len + self.kernel_size.div_ceil(s);
        let powers = PowerStack::build(
            input,
            self.q_order,
            s,
            self.padding.left(self.kernel_size),
            phase_len,
        );
        let mut out = FeatureMap::zeros(self.out_neurons, out_len);
        for k in 0..self.out_neurons {
            let acc = out.channel_mut(k);
            for i in 0..self.in_neurons {
                for q in 1..=self.q_order {
                    for r in 0..self.kernel_size {
                        let w = self.weight(k, i, r, q);
                        let src = &powers.phase(i, q - 1, r % s)[r / s..r / s + out_len];
                        for (a, &x) in acc.iter_mut().zip(src) {
                            *a += w * x;
                        }
                    }
                }
            }
            let b = self.biases[k];
            for a in acc.iter_mut() {
                *a += b;
            }
        }
        let cache = ConvCache {
            input: input.clone(),
            powers,
            output_len: out_len,
        };
        Ok((out, cache))
    }

    /// Backpropagates `delta` (gradient of the loss with respect to this layer's
    /// pre-activation output).
    ///
    /// Weight and bias gradients are accumulated into `grad`, which must have this
    /// layer's shape. Returns the gradient with respect to the layer input when
    /// `want_input_grad` is set.
    pub fn backward(
        &self,
        cache: &ConvCache<T>,
        delta: &FeatureMap<T>,
        grad: &mut OperationalConvLayer<T>,
        want_input_grad: bool,
    ) -> Result<Option<FeatureMap<T>>> {
        let out_len = cache.output_len;
        if delta.channels != self.out_neurons || delta.length != out_len {
            return Err(Error::Shape(format!(
                "delta is {}x{}, layer output is {}x{}",
                delta.channels, delta.length, self.out_neurons, out_len
            )));
        }
        let s = self.stride;
        let powers = &cache.powers;

        for k in 0..self.out_neurons {
            let d = delta.channel(k);
            let mut gb = T::zero();
            for &v in d {
                gb += v;
            }
            grad.biases[k] += gb;
            for i in 0..self.in_neurons {
                for r in 0..self.kernel_size {
                    for q in 1..=self.q_order {
                        let src = &powers.phase(i, q - 1, r % s)[r / s..r / s + out_len];
                        let mut g = T::zero();
                        for (&dv, &x) in d.iter().zip(src) {
                            g += dv * x;
                        }
                        let at = self.weight_index(k, i, r, q);
                        grad.weights[at] += g;
                    }
                }
            }
        }

        if !want_input_grad {
            return Ok(None);
        }

        // Gradient with respect to each power map, then chain through y^q.
        let mut gpow = PowerStack::zeros(self.in_neurons, self.q_order, s, powers.phase_len);
        for i in 0..self.in_neurons {
            for k in 0..self.out_neurons {
                let d = delta.channel(k);
                for q in 1..=self.q_order {
                    for r in 0..self.kernel_size {
                        let w = self.weight(k, i, r, q);
                        let dst = &mut gpow.phase_mut(i, q - 1, r % s)[r / s..r / s + out_len];
                        for (g, &dv) in dst.iter_mut().zip(d) {
                            *g += w * dv;
                        }
                    }
                }
            }
        }

        let input = &cache.input;
        let pad = self.padding.left(self.kernel_size);
        let mut gin = FeatureMap::zeros(self.in_neurons, input.length);
        for i in 0..self.in_neurons {
            let y = input.channel(i);
            let g = gin.channel_mut(i);
            for (n, (gv, &yv)) in g.iter_mut().zip(y).enumerate() {
                let j = n + pad;
                let (t, p) = (j / s, j % s);
                if t >= gpow.phase_len {
                    continue;
                }
                let mut acc = gpow.phase(i, 0, p)[t];
                let mut ypow = T::one();
                for q in 2..=self.q_order {
                    ypow *= yv;
                    acc += T::from_f64(q as f64) * ypow * gpow.phase(i, q - 1, p)[t];
                }
                *gv = acc;
            }
        }
        Ok(Some(gin))
    }
}

/// Fully connected layer of generative perceptrons: `out_k = b_k + sum_i sum_q w(k,i,q) x_i^q`.
///
/// Weights are indexed `[out][in][q]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerativeDenseLayer<T> {
    pub in_features: usize,
    pub out_features: usize,
    pub q_order: usize,
    pub weights: Vec<T>,
    pub biases: Vec<T>,
}

/// Input powers of a dense layer, `[q][i]`.
#[derive(Debug, Clone)]
pub struct DenseCache<T> {
    powers: Vec<T>,
}

impl<T: Real> GenerativeDenseLayer<T> {
    pub fn zeros(in_features: usize, out_features: usize, q_order: usize) -> Self {
        Self {
            in_features,
            out_features,
            q_order,
            weights: vec![T::zero(); out_features * in_features * q_order],
            biases: vec![T::zero(); out_features],
        }
    }

    #[inline]
    pub fn weight_index(&self, out: usize, inp: usize, q: usize) -> usize {
        debug_assert!(q >= 1 && q <= self.q_order);
        (out * self.in_features + inp) * self.q_order + (q - 1)
    }

    pub fn weight(&self, out: usize, inp: usize, q: usize) -> T {
        self.weights[self.weight_index(out, inp, q)]
    }

    pub fn set_weight(&mut self, out: usize, inp: usize, q: usize, v: T) {
        let at = self.weight_index(out, inp, q);
        self.weights[at] = v;
    }

    pub fn param_count(&self) -> usize {
        self.weights.len() + self.biases.len()
    }

    fn check_input(&self, input: &[T]) -> Result<()> {
        if self.weights.len() != self.out_features * self.in_features * self.q_order
            || self.biases.len() != self.out_features
        {
            return Err(Error::Shape(format!(
                "dense layer {}->{} Q={} has {} weights and {} biases",
                self.in_features,
                self.out_features,
                self.q_order,
                self.weights.len(),
                self.biases.len()
            )));
        }
        if input.len() != self.in_features {
            return Err(Error::Shape(format!(
                "dense layer expects {} inputs, got {}",
                self.in_features,
                input.len()
            )));
        }
        Ok(())
    }

    /// Pre-activation output.
    pub fn forward(&self, input: &[T]) -> Result<Vec<T>> {
        self.forward_cached(input).map(|(out, _)| out)
    }

    pub fn forward_cached(&self, input: &[T]) -> Result<(Vec<T>, DenseCache<T>)> {
        self.check_input(input)?;
        let n = self.in_features;
        let mut powers = Vec::with_capacity(n * self.q_order);
        powers.extend_from_slice(input);
        for q in 1..self.q_order {
            for i in 0..n {
                let p = powers[(q - 1) * n + i] * input[i];
                powers.push(p);
            }
        }
        let out = (0..self.out_features)
            .map(|k| {
                let row = &self.weights[k * n * self.q_order..(k + 1) * n * self.q_order];
                let mut acc = T::zero();
                for i in 0..n {
                    for q in 0..self.q_order {
                        acc += row[i * self.q_order + q] * powers[q * n + i];
                    }
                }
                acc + self.biases[k]
            })
            .collect();
        Ok((out, DenseCache { powers }))
    }

    /// Accumulates parameter gradients into `grad` and returns the gradient with
    /// respect to the input when requested.
    pub fn backward(
        &self,
        cache: &DenseCache<T>,
        delta: &[T],
        grad: &mut GenerativeDenseLayer<T>,
        want_input_grad: bool,
    ) -> Result<Option<Vec<T>>> {
        if delta.len() != self.out_features {
            return Err(Error::Shape(format!(
                "delta has {} entries, layer has {} outputs",
                delta.len(),
                self.out_features
            )));
        }
        let n = self.in_features;
        let qn = self.q_order;
        for (k, &d) in delta.iter().enumerate() {
            grad.biases[k] += d;
            for i in 0..n {
                for q in 0..qn {
                    grad.weights[(k * n + i) * qn + q] += d * cache.powers[q * n + i];
                }
            }
        }
        if !want_input_grad {
            return Ok(None);
        }
        let mut gpow = vec![T::zero(); qn * n];
        for (k, &d) in delta.iter().enumerate() {
            for i in 0..n {
                for q in 0..qn {
                    gpow[q * n + i] += self.weights[(k * n + i) * qn + q] * d;
                }
            }
        }
        let gin = (0..n)
            .map(|i| {
                let x = cache.powers[i];
                let mut acc = gpow[i];
                let mut xpow = T::one();
                for q in 2..=qn {
                    xpow *= x;
                    acc += T::from_f64(q as f64) * xpow * gpow[(q - 1) * n + i];
                }
                acc
            })
            .collect();
        Ok(Some(gin))
    }
}
