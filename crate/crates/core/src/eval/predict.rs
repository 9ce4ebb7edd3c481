use ndarray::{Array2, ArrayView2, Axis};

use super::{EvalError, THRESHOLD};
use crate::data::{LabelVector, ModalityCombo, Sample};
use crate::fusion::fuse_batch;
use crate::heads::{Head, Real};
use crate::vocab::NUM_TAGS;

const PREDICT_CHUNK: usize = 4096;

/// Per-sample probabilities and thresholded decisions.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionSet {
    pub ids: Vec<u64>,
    /// `N x 49`.
    pub probabilities: Array2<f64>,
    pub decisions: Vec<LabelVector>,
}

impl PredictionSet {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Applies the sigmoid and the strict `> 0.5` threshold to `N x 49` logits.
pub fn predictions_from_logits<T: Real>(ids: Vec<u64>, logits: ArrayView2<T>) -> PredictionSet {
    assert_eq!(ids.len(), logits.nrows());
    assert_eq!(logits.ncols(), NUM_TAGS);
    let probabilities = logits.mapv(|v| sigmoid(v.as_f64()));
    let decisions = probabilities
        .axis_iter(Axis(0))
        .map(|row| {
            let mut v = LabelVector::empty();
            for (i, &p) in row.iter().enumerate() {
                if p > THRESHOLD {
                    v.set(i, true).expect("49 columns");
                }
            }
            v
        })
        .collect();
    PredictionSet {
        ids,
        probabilities,
        decisions,
    }
}

/// Eval-mode predictions for `samples`.
pub fn predict(
    head: &Head<f32>,
    samples: &[Sample],
    combo: ModalityCombo,
) -> Result<PredictionSet, EvalError> {
    let mut logits = Array2::<f32>::zeros((samples.len(), head.output_dim()));
    for (chunk, mut out) in samples
        .chunks(PREDICT_CHUNK)
        .zip(logits.axis_chunks_iter_mut(Axis(0), PREDICT_CHUNK))
    {
        let x = fuse_batch(chunk, combo)?;
        out.assign(&head.predict_logits(x.view())?);
    }
    let ids = samples.iter().map(|s| s.id).collect();
    Ok(predictions_from_logits(ids, logits.view()))
}

/// Gives every empty row its single most probable tag (lowest index on
/// ties). Rows that already have a tag are left alone.
pub fn enforce_min_one_tag(pred: &PredictionSet) -> PredictionSet {
    let mut out = pred.clone();
    for (row, d) in out.probabilities.axis_iter(Axis(0)).zip(&mut out.decisions) {
        if d.is_empty() {
            let mut best = 0;
            for (i, &p) in row.iter().enumerate() {
                if p > row[best] {
                    best = i;
                }
            }
            d.set(best, true).expect("49 columns");
        }
    }
    out
}
