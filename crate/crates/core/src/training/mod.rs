//! Losses, negative sampling, Adam, and the two-stage training loop:
//! pretrain the shortcut model, freeze it, then train the target model on
//! masked logits.

mod adam;
mod config;
mod loss;
mod negatives;
mod pipeline;
mod trainer;

pub use adam::{adam_step, AdamState, BETA1, BETA2, EPSILON};
pub use config::{Negatives, TrainingConfig, DEFAULT_NEGATIVES};
pub use loss::{popgo_loss, sampled_softmax_loss};
pub use negatives::sample_negatives;
pub use pipeline::{fit_plain, fit_popgo, fit_shortcut, init_target, train_graph, PopgoFit};
pub use trainer::{
    mean_train_loss, train_plain, train_popgo, train_shortcut, train_target, train_target_with, EpochRecord, Mask, TrainOutcome,
    TrainingLog, VALIDATION_K,
};
