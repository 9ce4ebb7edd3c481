use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use log::{debug, info};
use ndarray::{Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;

use super::{bce_with_logits, cosine_lr, mixup, optimizer_step, OptimizerState, TrainConfig, TrainError};
use crate::data::{Dataset, LabelVector};
use crate::eval::{f1_from_bits, predictions_from_logits};
use crate::fusion::fuse_batch;
use crate::heads::{init_head_with, Checkpoint, Head, Mode, MLP_HIDDEN};
use crate::rng::{derive_seed, rng_from_seed, stream};
use crate::vocab::NUM_TAGS;

const EVAL_CHUNK: usize = 4096;

/// Patience counter on a metric that should increase. Only a strict
/// improvement resets it.
#[derive(Debug, Clone, PartialEq)]
pub struct EarlyStopping {
    patience: usize,
    best: Option<(usize, f64)>,
}

impl EarlyStopping {
    pub fn new(patience: usize) -> Self {
        EarlyStopping {
            patience,
            best: None,
        }
    }

    /// Records the metric for `epoch`; returns true if it is a new best.
    pub fn observe(&mut self, epoch: usize, value: f64) -> bool {
        match self.best {
            Some((_, b)) if value <= b => false,
            _ => {
                self.best = Some((epoch, value));
                true
            }
        }
    }

    pub fn should_stop(&self, epoch: usize) -> bool {
        match self.best {
            Some((b, _)) => epoch - b >= self.patience,
            None => false,
        }
    }

    pub fn best(&self) -> Option<(usize, f64)> {
        self.best
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_subset_acc: f64,
    pub val_macro_f1: f64,
    pub lr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub history: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub best_val_subset_acc: f64,
    /// Macro-F1 at the best epoch.
    pub best_val_macro_f1: f64,
    pub stopped_early: bool,
    pub seconds: f64,
}

impl RunReport {
    /// History CSV plus a `#` summary line. Wall-clock time is left out so
    /// reruns produce identical files.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("epoch,train_loss,val_subset_acc,val_macro_f1,lr\n");
        for r in &self.history {
            writeln!(
                s,
                "{},{},{},{},{}",
                r.epoch, r.train_loss, r.val_subset_acc, r.val_macro_f1, r.lr
            )
            .unwrap();
        }
        writeln!(
            s,
            "# best_epoch={} best_val_subset_acc={} best_val_macro_f1={} epochs_run={} stopped_early={}",
            self.best_epoch,
            self.best_val_subset_acc,
            self.best_val_macro_f1,
            self.history.len(),
            self.stopped_early
        )
        .unwrap();
        s
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), TrainError> {
        fs::write(path, self.to_csv()).map_err(|source| TrainError::Io {
            path: path.display().to_string(),
            source,
        })
    }
}

/// The best head (as a checkpoint) and the run history.
#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub checkpoint: Checkpoint,
    pub report: RunReport,
}

impl FitOutcome {
    pub fn head(&self) -> &Head<f32> {
        &self.checkpoint.head
    }
}

fn label_matrix(labels: &[LabelVector]) -> Array2<f32> {
    Array2::from_shape_fn((labels.len(), NUM_TAGS), |(i, j)| labels[i].get(j) as u8 as f32)
}

fn labels_of(ds: &Dataset) -> Result<Vec<LabelVector>, TrainError> {
    ds.samples()
        .iter()
        .map(|s| s.labels.ok_or(TrainError::Unlabeled(s.id)))
        .collect()
}

/// Trains on `train`, selecting the epoch with the best validation subset
/// accuracy on `val`.
pub fn fit(train: &Dataset, val: &Dataset, config: &TrainConfig) -> Result<FitOutcome, TrainError> {
    if train.is_empty() {
        return Err(TrainError::EmptyTrainSet);
    }
    if val.is_empty() {
        return Err(TrainError::EmptyValSet);
    }
    let y_train = labels_of(train)?;
    let y_val = labels_of(val)?;
    let x_train = fuse_batch(train.samples(), config.combo)?;
    let x_val = fuse_batch(val.samples(), config.combo)?;
    fit_arrays(x_train.view(), &y_train, x_val.view(), &y_val, config)
}

/// `fit` on already fused feature matrices.
pub fn fit_arrays(
    x_train: ArrayView2<f32>,
    y_train: &[LabelVector],
    x_val: ArrayView2<f32>,
    y_val: &[LabelVector],
    config: &TrainConfig,
) -> Result<FitOutcome, TrainError> {
    config.validate()?;
    let start = Instant::now();
    let n = x_train.nrows();
    if n == 0 {
        return Err(TrainError::EmptyTrainSet);
    }
    if x_val.nrows() == 0 {
        return Err(TrainError::EmptyValSet);
    }
    let d = config.combo.dim();
    for (what, x, y) in [("train", &x_train, y_train.len()), ("val", &x_val, y_val.len())] {
        if x.dim() != (y, d) {
            return Err(TrainError::ShapeMismatch {
                what,
                expected: (y, d),
                got: x.dim(),
            });
        }
    }
    let y_train = label_matrix(y_train);

    let seed = config.seed;
    let mut head: Head<f32> = init_head_with(
        config.head_kind,
        d,
        NUM_TAGS,
        MLP_HIDDEN,
        config.dropout_p,
        derive_seed(seed, &[stream::INIT]),
    );
    let mut opt = OptimizerState::new(config.optimizer, &head);
    let mut shuffle_rng = rng_from_seed(derive_seed(seed, &[stream::SHUFFLE]));
    let mut dropout_rng = rng_from_seed(derive_seed(seed, &[stream::DROPOUT]));
    let mut mixup_rng = rng_from_seed(derive_seed(seed, &[stream::MIXUP]));

    let mut stopper = EarlyStopping::new(config.patience);
    let mut best: Option<(Head<f32>, f64)> = None;
    let mut history = Vec::new();
    let mut stopped_early = false;
    let mut order: Vec<usize> = (0..n).collect();

    for epoch in 0..config.max_epochs {
        let lr = cosine_lr(epoch, config.lr_max, config.lr_min, config.t_max);
        order.shuffle(&mut shuffle_rng);
        let mut loss_sum = 0.0;
        for chunk in order.chunks(config.batch_size) {
            let mut xb = x_train.select(Axis(0), chunk);
            let mut yb = y_train.select(Axis(0), chunk);
            if config.mixup_enabled && chunk.len() >= 2 {
                (xb, yb) = mixup(
                    xb.view(),
                    yb.view(),
                    config.mixup_alpha,
                    config.mixup_per_sample,
                    &mut mixup_rng,
                )?;
            }
            let (logits, cache) = head.forward(xb.view(), Mode::Train, Some(&mut dropout_rng))?;
            let (loss, grad) = bce_with_logits(logits.view(), yb.view())?;
            let grads = head.backward(&cache, grad.view())?;
            optimizer_step(&mut head, &grads, &mut opt, lr)?;
            loss_sum += loss * chunk.len() as f64;
        }
        if !head.is_finite() {
            return Err(TrainError::Diverged { epoch });
        }
        let mut logits = Array2::<f32>::zeros((x_val.nrows(), NUM_TAGS));
        for (xc, mut out) in x_val
            .axis_chunks_iter(Axis(0), EVAL_CHUNK)
            .zip(logits.axis_chunks_iter_mut(Axis(0), EVAL_CHUNK))
        {
            out.assign(&head.predict_logits(xc)?);
        }
        let pred = predictions_from_logits(vec![0; x_val.nrows()], logits.view());
        let m = f1_from_bits(&pred.decisions, y_val, NUM_TAGS);
        let rec = EpochRecord {
            epoch,
            train_loss: loss_sum / n as f64,
            val_subset_acc: m.subset_accuracy,
            val_macro_f1: m.macro_f1,
            lr,
        };
        debug!(
            "epoch {epoch}: loss {:.5} val acc {:.4} f1 {:.4} lr {lr:.3e}",
            rec.train_loss, rec.val_subset_acc, rec.val_macro_f1
        );
        history.push(rec);
        if stopper.observe(epoch, m.subset_accuracy) {
            best = Some((head.clone(), m.macro_f1));
        }
        if stopper.should_stop(epoch) {
            stopped_early = epoch + 1 < config.max_epochs;
            break;
        }
    }

    let (best_epoch, best_acc) = stopper.best().expect("at least one epoch");
    let (best_head, best_f1) = best.expect("at least one epoch");
    info!(
        "{} / {} / mixup={}: best val acc {best_acc:.4} at epoch {best_epoch} ({} epochs)",
        config.combo,
        config.head_kind,
        config.mixup_enabled,
        history.len()
    );
    let report = RunReport {
        history,
        best_epoch,
        best_val_subset_acc: best_acc,
        best_val_macro_f1: best_f1,
        stopped_early,
        seconds: start.elapsed().as_secs_f64(),
    };
    Ok(FitOutcome {
        checkpoint: Checkpoint {
            combo: config.combo,
            head: best_head,
            seed,
            epoch: best_epoch as u32,
        },
        report,
    })
}
