//! MSE loss, analytic backpropagation, Adam and the training loop.

pub mod adam;
pub mod backward;
pub mod gradcheck;
pub mod loss;
pub mod split;
pub mod trainer;

pub use adam::{adam_step, AdamConfig, OptimizerState};
pub use backward::{accumulate, batch_loss, model_backward};
pub use gradcheck::{central_difference, finite_difference_oracle};
pub use loss::{encode_target, mse_loss};
pub use split::{split_train_validation, Labeled};
pub use trainer::{
    select_best_epoch, tensors, train_from, train_model, EpochRecord, TrainConfig, TrainOutcome,
    TrainReport,
};
