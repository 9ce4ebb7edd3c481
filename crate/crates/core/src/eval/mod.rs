//! Thresholded predictions, metrics, submissions and dataset statistics.

mod metrics;
mod predict;
mod stats;
mod submission;

use thiserror::Error;

use crate::fusion::FusionError;
use crate::heads::HeadError;

pub use metrics::{
    f1_from_bits, f1_scores, render_metric_report, subset_accuracy, subset_accuracy_bits,
    write_metric_report, MetricReport,
};
pub use predict::{enforce_min_one_tag, predict, predictions_from_logits, sigmoid, PredictionSet};
pub use stats::{dataset_stats, DatasetStats, TitleStats};
pub use submission::{read_submission, render_submission, write_submission};

/// Decision threshold on the predicted probability (strict `>`).
pub const THRESHOLD: f64 = 0.5;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("id mismatch: {0}")]
    IdMismatch(String),
    #[error("sample {0} has no predicted tags")]
    EmptyPredictionRow(u64),
    #[error("empty dataset")]
    EmptyDataset,
    #[error("{path}:{line}: {reason}")]
    Malformed {
        path: String,
        line: usize,
        reason: String,
    },
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
