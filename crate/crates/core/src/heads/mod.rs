//! Trainable classification heads over the fused feature vector.
//!
//! Both heads are generic over the float type so that training runs in
//! `f32` while gradient checks run in `f64`.

mod checkpoint;
mod linear;
mod mlp;

use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, ArrayView2};
use thiserror::Error;

use crate::rng::Rng;
use crate::vocab::NUM_TAGS;

pub use checkpoint::{read_checkpoint, write_checkpoint, Checkpoint, CheckpointError, CKPT_MAGIC};
pub use linear::LinearHead;
pub use mlp::MlpHead;

/// Hidden width of the MLP head.
pub const MLP_HIDDEN: usize = 256;
/// Dropout rate of the MLP head.
pub const MLP_DROPOUT: f64 = 0.5;

/// Float types the heads can be instantiated with.
pub trait Real:
    num_traits::Float
    + ndarray::LinalgScalar
    + ndarray::ScalarOperand
    + Default
    + Send
    + Sync
    + fmt::Debug
    + fmt::Display
    + std::ops::MulAssign
    + std::ops::AddAssign
    + std::ops::SubAssign
    + 'static
{
    fn lit(x: f64) -> Self;
    fn as_f64(self) -> f64;
}

impl Real for f32 {
    fn lit(x: f64) -> Self {
        x as f32
    }
    fn as_f64(self) -> f64 {
        self as f64
    }
}

impl Real for f64 {
    fn lit(x: f64) -> Self {
        x
    }
    fn as_f64(self) -> f64 {
        self
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HeadError {
    #[error("input has {got} columns, head expects {expected}")]
    DimMismatch { expected: usize, got: usize },
    #[error("gradient batch {got:?} does not match the cached forward pass {expected:?}")]
    StaleCache {
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("training-mode MLP forward needs a random source for dropout")]
    MissingRng,
    #[error("dropout mask shape {got:?}, expected {expected:?}")]
    MaskShape {
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("cache was produced by a different head kind")]
    CacheKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HeadKind {
    Linear,
    Mlp,
}

impl HeadKind {
    pub const ALL: [HeadKind; 2] = [HeadKind::Linear, HeadKind::Mlp];

    pub fn name(self) -> &'static str {
        match self {
            HeadKind::Linear => "linear",
            HeadKind::Mlp => "mlp",
        }
    }

    pub fn tag(self) -> u8 {
        self as u8
    }

    pub fn from_tag(t: u8) -> Option<Self> {
        Self::ALL.get(t as usize).copied()
    }
}

impl fmt::Display for HeadKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for HeadKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "linear" => Ok(HeadKind::Linear),
            "mlp" => Ok(HeadKind::Mlp),
            other => Err(format!("unknown head kind {other:?} (expected linear or mlp)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// Intermediates of one forward pass, consumed by `backward`.
#[derive(Debug, Clone)]
pub struct ForwardCache<T> {
    pub(crate) input: Array2<T>,
    /// MLP pre-activation `x W1^T + b1`.
    pub(crate) hidden_pre: Option<Array2<T>>,
    /// MLP hidden activations after ReLU and dropout.
    pub(crate) hidden: Option<Array2<T>>,
    /// Inverted-dropout multipliers (0 or 1/(1-p)); `None` in eval mode.
    pub(crate) mask: Option<Array2<T>>,
    pub(crate) n_out: usize,
}

impl<T: Real> ForwardCache<T> {
    pub fn batch_size(&self) -> usize {
        self.input.nrows()
    }

    pub fn mask(&self) -> Option<&Array2<T>> {
        self.mask.as_ref()
    }

    fn check_grad(&self, grad: &ArrayView2<T>) -> Result<(), HeadError> {
        let expected = (self.batch_size(), self.n_out);
        let got = grad.dim();
        if expected != got {
            return Err(HeadError::StaleCache { expected, got });
        }
        Ok(())
    }
}

/// A classification head. Gradients share the same type: `backward` returns a
/// `Head` whose parameters hold the gradient of each parameter.
#[derive(Debug, Clone, PartialEq)]
pub enum Head<T> {
    Linear(LinearHead<T>),
    Mlp(MlpHead<T>),
}

/// Glorot-uniform `rows x cols` matrix drawn in `f64` and cast.
pub(crate) fn glorot<T: Real>(rows: usize, cols: usize, rng: &mut Rng) -> Array2<T> {
    use rand::Rng as _;
    let s = (6.0 / (rows + cols) as f64).sqrt();
    Array2::from_shape_simple_fn((rows, cols), || T::lit(rng.random_range(-s..s)))
}

/// Head with 49 outputs, Glorot-uniform weights and zero biases.
pub fn init_head<T: Real>(kind: HeadKind, d: usize, seed: u64) -> Head<T> {
    init_head_with(kind, d, NUM_TAGS, MLP_HIDDEN, MLP_DROPOUT, seed)
}

pub fn init_head_with<T: Real>(
    kind: HeadKind,
    d: usize,
    n_out: usize,
    hidden: usize,
    dropout_p: f64,
    seed: u64,
) -> Head<T> {
    let mut rng = crate::rng::rng_from_seed(seed);
    match kind {
        HeadKind::Linear => Head::Linear(LinearHead::init(d, n_out, &mut rng)),
        HeadKind::Mlp => Head::Mlp(MlpHead::init(d, hidden, n_out, dropout_p, &mut rng)),
    }
}

impl<T: Real> Head<T> {
    pub fn kind(&self) -> HeadKind {
        match self {
            Head::Linear(_) => HeadKind::Linear,
            Head::Mlp(_) => HeadKind::Mlp,
        }
    }

    pub fn input_dim(&self) -> usize {
        match self {
            Head::Linear(h) => h.weight.ncols(),
            Head::Mlp(h) => h.w1.ncols(),
        }
    }

    pub fn output_dim(&self) -> usize {
        match self {
            Head::Linear(h) => h.weight.nrows(),
            Head::Mlp(h) => h.w2.nrows(),
        }
    }

    /// `B x n_out` logits and the cache for `backward`. `rng` is only used
    /// (and then required) for an MLP in training mode.
    pub fn forward(
        &self,
        batch: ArrayView2<T>,
        mode: Mode,
        rng: Option<&mut Rng>,
    ) -> Result<(Array2<T>, ForwardCache<T>), HeadError> {
        match self {
            Head::Linear(h) => h.forward(batch),
            Head::Mlp(h) => {
                let mask = match mode {
                    Mode::Eval => None,
                    Mode::Train => {
                        let rng = rng.ok_or(HeadError::MissingRng)?;
                        Some(h.sample_mask(batch.nrows(), rng))
                    }
                };
                h.forward_with_mask(batch, mask)
            }
        }
    }

    /// Eval-mode logits without keeping a cache.
    pub fn predict_logits(&self, batch: ArrayView2<T>) -> Result<Array2<T>, HeadError> {
        self.forward(batch, Mode::Eval, None).map(|(l, _)| l)
    }

    /// Vector-Jacobian product: given `dL/dlogits`, returns `dL/dparam` for
    /// every parameter, summed over the batch rows. The dropout mask from the
    /// forward pass is held fixed.
    pub fn backward(
        &self,
        cache: &ForwardCache<T>,
        grad_logits: ArrayView2<T>,
    ) -> Result<Head<T>, HeadError> {
        cache.check_grad(&grad_logits)?;
        match self {
            Head::Linear(h) => h.backward(cache, grad_logits).map(Head::Linear),
            Head::Mlp(h) => h.backward(cache, grad_logits).map(Head::Mlp),
        }
    }

    /// Parameter tensors in checkpoint order, flattened row-major.
    pub fn params(&self) -> Vec<&[T]> {
        match self {
            Head::Linear(h) => vec![h.weight.as_slice().unwrap(), h.bias.as_slice().unwrap()],
            Head::Mlp(h) => vec![
                h.w1.as_slice().unwrap(),
                h.b1.as_slice().unwrap(),
                h.w2.as_slice().unwrap(),
                h.b2.as_slice().unwrap(),
            ],
        }
    }

    pub fn params_mut(&mut self) -> Vec<&mut [T]> {
        match self {
            Head::Linear(h) => vec![
                h.weight.as_slice_mut().unwrap(),
                h.bias.as_slice_mut().unwrap(),
            ],
            Head::Mlp(h) => vec![
                h.w1.as_slice_mut().unwrap(),
                h.b1.as_slice_mut().unwrap(),
                h.w2.as_slice_mut().unwrap(),
                h.b2.as_slice_mut().unwrap(),
            ],
        }
    }

    pub fn num_params(&self) -> usize {
        self.params().iter().map(|p| p.len()).sum()
    }

    pub fn zeros_like(&self) -> Head<T> {
        let mut z = self.clone();
        for p in z.params_mut() {
            p.fill(T::zero());
        }
        z
    }

    pub fn is_finite(&self) -> bool {
        self.params().iter().all(|p| p.iter().all(|v| v.is_finite()))
    }

    /// Converts every parameter to another float type.
    pub fn cast<U: Real>(&self) -> Head<U> {
        let c = |a: &Array2<T>| a.mapv(|v| U::lit(v.as_f64()));
        let c1 = |a: &ndarray::Array1<T>| a.mapv(|v| U::lit(v.as_f64()));
        match self {
            Head::Linear(h) => Head::Linear(LinearHead {
                weight: c(&h.weight),
                bias: c1(&h.bias),
            }),
            Head::Mlp(h) => Head::Mlp(MlpHead {
                w1: c(&h.w1),
                b1: c1(&h.b1),
                w2: c(&h.w2),
                b2: c1(&h.b2),
                dropout_p: h.dropout_p,
            }),
        }
    }
}
