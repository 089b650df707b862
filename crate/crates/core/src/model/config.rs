use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::layers::Padding;
use crate::SEGMENT_LEN;

/// One operational layer of the network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpLayerSpec {
    pub out_neurons: usize,
    pub kernel_size: usize,
    pub stride: usize,
}

impl OpLayerSpec {
    pub const fn new(out_neurons: usize, kernel_size: usize, stride: usize) -> Self {
        Self {
            out_neurons,
            kernel_size,
            stride,
        }
    }
}

/// Network architecture: operational layers, one generative dense layer and a
/// generative output layer, tanh after every layer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub input_length: usize,
    pub op_layers: Vec<OpLayerSpec>,
    pub q_order: usize,
    pub dense_width: usize,
    pub output_classes: usize,
}

impl Default for ModelConfig {
    /// Five operational layers (16 neurons each, kernels 81/41/21/7/7, stride 2),
    /// Q = 3, 32 dense perceptrons and 2 outputs: 259,170 parameters.
    fn default() -> Self {
        Self {
            input_length: SEGMENT_LEN,
            op_layers: vec![
                OpLayerSpec::new(16, 81, 2),
                OpLayerSpec::new(16, 41, 2),
                OpLayerSpec::new(16, 21, 2),
                OpLayerSpec::new(16, 7, 2),
                OpLayerSpec::new(16, 7, 2),
            ],
            q_order: 3,
            dense_width: 32,
            output_classes: 2,
        }
    }
}

impl ModelConfig {
    /// Three operational layers of 8 neurons (kernels 81/41/21, stride 4), Q = 3,
    /// 32 dense perceptrons. Small enough to train in seconds per epoch.
    pub fn reduced() -> Self {
        Self {
            input_length: SEGMENT_LEN,
            op_layers: vec![
                OpLayerSpec::new(8, 81, 4),
                OpLayerSpec::new(8, 41, 4),
                OpLayerSpec::new(8, 21, 4),
            ],
            q_order: 3,
            dense_width: 32,
            output_classes: 2,
        }
    }

    /// Looks up a named architecture (`default` or `reduced`).
    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "default" => Some(Self::default()),
            "reduced" | "small" => Some(Self::reduced()),
            _ => None,
        }
    }

    pub fn with_q_order(mut self, q_order: usize) -> Self {
        self.q_order = q_order;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: usize| {
            if v == 0 {
                Err(Error::Config(format!("{name} must be positive")))
            } else {
                Ok(())
            }
        };
        positive("input_length", self.input_length)?;
        positive("q_order", self.q_order)?;
        positive("dense_width", self.dense_width)?;
        positive("output_classes", self.output_classes)?;
        for (l, spec) in self.op_layers.iter().enumerate() {
            positive(&format!("op_layers[{l}].out_neurons"), spec.out_neurons)?;
            positive(&format!("op_layers[{l}].kernel_size"), spec.kernel_size)?;
            positive(&format!("op_layers[{l}].stride"), spec.stride)?;
        }
        Ok(())
    }

    /// `(channels, length)` of the input and of every operational layer output.
    pub fn shape_trace(&self) -> Vec<(usize, usize)> {
        let mut shapes = vec![(1, self.input_length)];
        let mut len = self.input_length;
        for spec in &self.op_layers {
            len = Padding::Same.output_len(len, spec.kernel_size, spec.stride);
            shapes.push((spec.out_neurons, len));
        }
        shapes
    }

    /// Length of the flattened feature vector fed to the dense layer.
    pub fn flatten_width(&self) -> usize {
        let (c, l) = *self.shape_trace().last().unwrap();
        c * l
    }

    /// Number of learnable values, from the layer shapes alone.
    pub fn param_count(&self) -> usize {
        let q = self.q_order;
        let mut inp = 1;
        let mut total = 0;
        for spec in &self.op_layers {
            total += spec.out_neurons * inp * spec.kernel_size * q + spec.out_neurons;
            inp = spec.out_neurons;
        }
        total += self.dense_width * self.flatten_width() * q + self.dense_width;
        total += self.output_classes * self.dense_width * q + self.output_classes;
        total
    }

    /// Sum of operational-layer neurons.
    pub fn operational_neurons(&self) -> usize {
        self.op_layers.iter().map(|s| s.out_neurons).sum()
    }
}
