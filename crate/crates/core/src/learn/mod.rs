//! Weight-mode classifier: multinomial logistic regression over the eight
//! flock features, trained from choreographer-labeled examples.

mod model;
mod train;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::FeatureVector;
use crate::flock::ModeId;

pub use model::{
    load_model, predict_mode, save_model, Model, MODEL_FORMAT, MODEL_VERSION, N_CLASSES, N_INPUTS,
};
pub use train::{loss_and_gradient, train, TrainConfig, TrainReport, Trained};

/// A feature vector labelled with the mode a choreographer picked for it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingExample {
    pub features: FeatureVector,
    pub label: ModeId,
    pub tick: u64,
    pub session: String,
}

#[derive(Debug, Error)]
pub enum LearnError {
    #[error("no training examples")]
    EmptyDataset,
    #[error("non-finite {0}")]
    NonFinite(&'static str),
    #[error("model file i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("corrupt model file: {0}")]
    Corrupt(String),
    #[error("unsupported model version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },
    #[error("not a weight-mode model (format '{0}')")]
    Format(String),
}
