use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::config::ModelConfig;
use crate::model::network::ModelParameters;
use crate::real::Real;
use crate::signal::Segment;
use crate::train::adam::{adam_step, AdamConfig, OptimizerState};
use crate::train::backward::{batch_loss, model_backward};
use crate::train::loss::encode_target;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub validation_fraction: f64,
    pub seed: u64,
    /// Epochs without a validation improvement before stopping.
    pub patience: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-4,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_epsilon: 1e-8,
            batch_size: 32,
            max_epochs: 200,
            validation_fraction: 0.2,
            seed: 0,
            patience: 30,
        }
    }
}

impl TrainConfig {
    pub fn adam(&self) -> AdamConfig {
        AdamConfig {
            learning_rate: self.learning_rate,
            beta1: self.adam_beta1,
            beta2: self.adam_beta2,
            epsilon: self.adam_epsilon,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return Err(Error::Config(format!(
                "validation_fraction must be in (0, 1), got {}",
                self.validation_fraction
            )));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::Config(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.batch_size == 0 || self.max_epochs == 0 {
            return Err(Error::Config(
                "batch_size and max_epochs must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    /// 1-based epoch number.
    pub epoch: usize,
    pub train_loss: f64,
    pub validation_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub epochs: Vec<EpochRecord>,
    /// Epoch whose parameters were kept (minimal validation loss).
    pub best_epoch: usize,
    pub best_validation_loss: f64,
    pub stopped_early: bool,
    pub train_segments: usize,
    pub validation_segments: usize,
    pub checkpoint: Option<String>,
}

/// Result of [`train_model`]: the report plus the best-epoch parameters.
#[derive(Debug, Clone)]
pub struct TrainOutcome<T> {
    pub report: TrainReport,
    pub params: ModelParameters<T>,
}

/// Index of the first minimum of `losses`.
pub fn select_best_epoch(losses: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &l) in losses.iter().enumerate() {
        if best.is_none_or(|b| l < losses[b]) {
            best = Some(i);
        }
    }
    best
}

/// Trains a freshly initialized model (seeded by `train_cfg.seed`).
pub fn train_model<T: Real>(
    train: &[Segment],
    validation: &[Segment],
    model_cfg: &ModelConfig,
    train_cfg: &TrainConfig,
) -> Result<TrainOutcome<T>> {
    let init = ModelParameters::<T>::init(model_cfg, train_cfg.seed)?;
    train_from(init, train, validation, train_cfg, |_| {})
}

/// Trains `params` with Adam on shuffled mini-batches, evaluating the validation
/// loss after each epoch and keeping the parameters of the best epoch.
///
/// `on_epoch` is called after every completed epoch.
pub fn train_from<T: Real>(
    mut params: ModelParameters<T>,
    train: &[Segment],
    validation: &[Segment],
    cfg: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochRecord),
) -> Result<TrainOutcome<T>> {
    cfg.validate()?;
    if train.is_empty() || validation.is_empty() {
        return Err(Error::Data(format!(
            "training needs non-empty train and validation sets (got {} and {})",
            train.len(),
            validation.len()
        )));
    }
    let (train_x, train_y) = tensors::<T>(train);
    let (val_x, val_y) = tensors::<T>(validation);
    let adam = cfg.adam();
    let mut state = OptimizerState::new(&params);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(0x5eed));
    let mut order: Vec<usize> = (0..train.len()).collect();

    let mut epochs = Vec::new();
    let mut best_params = params.clone();
    let mut best_loss = f64::INFINITY;
    let mut best_epoch = 0;
    let mut stopped_early = false;

    for epoch in 1..=cfg.max_epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for (b, idx) in order.chunks(cfg.batch_size).enumerate() {
            let xs: Vec<&[T]> = idx.iter().map(|&i| train_x[i].as_slice()).collect();
            let ys: Vec<Vec<T>> = idx.iter().map(|&i| train_y[i].clone()).collect();
            let (loss, grads) = model_backward(&params, &xs, &ys)?;
            if !loss.is_finite() {
                return Err(Error::Divergence {
                    epoch,
                    batch: Some(b),
                    loss,
                });
            }
            adam_step(&mut state, &mut params, &grads, &adam);
            loss_sum += loss * idx.len() as f64;
        }
        let train_loss = loss_sum / train.len() as f64;
        let validation_loss = batch_loss(&params, &val_x, &val_y)?;
        if !validation_loss.is_finite() {
            return Err(Error::Divergence {
                epoch,
                batch: None,
                loss: validation_loss,
            });
        }
        let record = EpochRecord {
            epoch,
            train_loss,
            validation_loss,
        };
        on_epoch(&record);
        epochs.push(record);

        if validation_loss < best_loss {
            best_loss = validation_loss;
            best_epoch = epoch;
            best_params = params.clone();
        } else if epoch - best_epoch >= cfg.patience {
            stopped_early = epoch < cfg.max_epochs;
            break;
        }
    }

    Ok(TrainOutcome {
        report: TrainReport {
            epochs,
            best_epoch,
            best_validation_loss: best_loss,
            stopped_early,
            train_segments: train.len(),
            validation_segments: validation.len(),
            checkpoint: None,
        },
        params: best_params,
    })
}

/// Network inputs and encoded targets for a set of segments.
pub fn tensors<T: Real>(segments: &[Segment]) -> (Vec<Vec<T>>, Vec<Vec<T>>) {
    segments
        .iter()
        .map(|s| {
            let x = s.values.iter().map(|&v| T::from_f64(v as f64)).collect();
            (x, encode_target::<T>(s.label).to_vec())
        })
        .unzip()
}
