//! The Self-ONN model: generative-neuron layers, architecture description,
//! parameter initialization, forward propagation and checkpoints.

pub mod checkpoint;
pub mod config;
pub mod layers;
pub mod network;

pub use checkpoint::{
    load_checkpoint, save_checkpoint, AnyParameters, Checkpoint, CheckpointError,
};
pub use config::{ModelConfig, OpLayerSpec};
pub use layers::{
    raise_to_powers, tanh_apply, FeatureMap, GenerativeDenseLayer, OperationalConvLayer, Padding,
};
pub use network::{ForwardTrace, GradientSet, ModelParameters};

/// Closed-form parameter count of `config`.
pub fn param_count(config: &ModelConfig) -> usize {
    config.param_count()
}
