use std::collections::HashMap;
use std::fs;
use std::path::Path;

use super::{EvalError, PredictionSet};
use crate::data::LabelVector;
use crate::vocab::{TagVocabulary, NUM_TAGS};

/// Subset accuracy plus per-class and macro-averaged F1.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub n_samples: usize,
    pub subset_accuracy: f64,
    pub macro_f1: f64,
    pub per_class_f1: Vec<f64>,
    /// Number of true positives in the ground truth per class.
    pub support: Vec<usize>,
}

/// Fraction of rows whose decision vector equals the label vector exactly.
pub fn subset_accuracy_bits(pred: &[LabelVector], truth: &[LabelVector]) -> f64 {
    assert_eq!(pred.len(), truth.len(), "prediction/label count mismatch");
    if pred.is_empty() {
        return 0.0;
    }
    let hits = pred.iter().zip(truth).filter(|(p, t)| p == t).count();
    hits as f64 / pred.len() as f64
}

/// Per-class `F1 = 2TP / (2TP + FP + FN)` over the first `n_classes` bits,
/// with 0/0 defined as 0. The macro average includes zero-support classes.
pub fn f1_from_bits(pred: &[LabelVector], truth: &[LabelVector], n_classes: usize) -> MetricReport {
    assert_eq!(pred.len(), truth.len(), "prediction/label count mismatch");
    assert!(n_classes <= NUM_TAGS);
    let mut tp = vec![0usize; n_classes];
    let mut fp = vec![0usize; n_classes];
    let mut fn_ = vec![0usize; n_classes];
    for (p, t) in pred.iter().zip(truth) {
        for c in 0..n_classes {
            match (p.get(c), t.get(c)) {
                (true, true) => tp[c] += 1,
                (true, false) => fp[c] += 1,
                (false, true) => fn_[c] += 1,
                (false, false) => {}
            }
        }
    }
    let per_class_f1: Vec<f64> = (0..n_classes)
        .map(|c| {
            let denom = 2 * tp[c] + fp[c] + fn_[c];
            if denom == 0 {
                0.0
            } else {
                (2 * tp[c]) as f64 / denom as f64
            }
        })
        .collect();
    let macro_f1 = if n_classes == 0 {
        0.0
    } else {
        per_class_f1.iter().sum::<f64>() / n_classes as f64
    };
    MetricReport {
        n_samples: pred.len(),
        subset_accuracy: subset_accuracy_bits(pred, truth),
        macro_f1,
        per_class_f1,
        support: (0..n_classes).map(|c| tp[c] + fn_[c]).collect(),
    }
}

/// Ground-truth labels in prediction order; every predicted id must have
/// exactly one label row and vice versa.
fn aligned_truth(
    pred: &PredictionSet,
    truth: &[(u64, LabelVector)],
) -> Result<Vec<LabelVector>, EvalError> {
    if pred.len() != truth.len() {
        return Err(EvalError::IdMismatch(format!(
            "{} predictions but {} labels",
            pred.len(),
            truth.len()
        )));
    }
    let map: HashMap<u64, LabelVector> = truth.iter().copied().collect();
    if map.len() != truth.len() {
        return Err(EvalError::IdMismatch("duplicate ids in labels".into()));
    }
    pred.ids
        .iter()
        .map(|id| {
            map.get(id)
                .copied()
                .ok_or_else(|| EvalError::IdMismatch(format!("no label for id {id}")))
        })
        .collect()
}

pub fn subset_accuracy(
    pred: &PredictionSet,
    truth: &[(u64, LabelVector)],
) -> Result<f64, EvalError> {
    let t = aligned_truth(pred, truth)?;
    Ok(subset_accuracy_bits(&pred.decisions, &t))
}

pub fn f1_scores(
    pred: &PredictionSet,
    truth: &[(u64, LabelVector)],
) -> Result<MetricReport, EvalError> {
    let t = aligned_truth(pred, truth)?;
    Ok(f1_from_bits(&pred.decisions, &t, NUM_TAGS))
}

/// Per-class CSV (`index,name,f1,support`) followed by summary lines.
pub fn render_metric_report(report: &MetricReport, vocab: &TagVocabulary) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["index", "name", "f1", "support"]).unwrap();
    for (i, (f1, support)) in report.per_class_f1.iter().zip(&report.support).enumerate() {
        w.write_record([
            i.to_string(),
            vocab.name(i).unwrap_or("?").to_string(),
            format!("{f1:.6}"),
            support.to_string(),
        ])
        .unwrap();
    }
    let mut out = String::from_utf8(w.into_inner().unwrap()).unwrap();
    out.push_str(&format!("# samples={}\n", report.n_samples));
    out.push_str(&format!("# subset_accuracy={:.6}\n", report.subset_accuracy));
    out.push_str(&format!("# macro_f1={:.6}\n", report.macro_f1));
    out
}

pub fn write_metric_report(
    path: &Path,
    report: &MetricReport,
    vocab: &TagVocabulary,
) -> Result<(), EvalError> {
    fs::write(path, render_metric_report(report, vocab)).map_err(|source| EvalError::Io {
        path: path.display().to_string(),
        source,
    })
}
