//! Loss, MixUp, learning-rate schedule, optimizer and the training loop.

mod config;
mod fit;
mod loss;
mod mixup;
mod optim;
mod schedule;

use thiserror::Error;

use crate::fusion::FusionError;
use crate::heads::HeadError;

pub use config::{ConfigError, TrainConfig, CONFIG_KEYS};
pub use fit::{fit, fit_arrays, EarlyStopping, EpochRecord, FitOutcome, RunReport};
pub use loss::bce_with_logits;
pub use mixup::{mixup, mixup_with, sample_lambda};
pub use optim::{optimizer_step, OptimizerKind, OptimizerState, ADAM_BETA1, ADAM_BETA2, ADAM_EPS};
pub use schedule::cosine_lr;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("non-finite logit or target outside [0, 1]")]
    NonFiniteInput,
    #[error("{what}: expected shape {expected:?}, got {got:?}")]
    ShapeMismatch {
        what: &'static str,
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("MixUp needs at least 2 rows, got {0}")]
    BatchTooSmall(usize),
    #[error("MixUp alpha must be positive, got {0}")]
    BadAlpha(f64),
    #[error("gradient shape does not match parameters ({got} vs {expected} values)")]
    OptimizerShape { expected: usize, got: usize },
    #[error("training set is empty")]
    EmptyTrainSet,
    #[error("validation set is empty")]
    EmptyValSet,
    #[error("sample {0} has no labels")]
    Unlabeled(u64),
    #[error("parameters became non-finite in epoch {epoch}")]
    Diverged { epoch: usize },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Fusion(#[from] FusionError),
    #[error(transparent)]
    Head(#[from] HeadError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
