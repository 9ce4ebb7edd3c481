use ndarray::{Array1, Array2, ArrayView2, Axis, Zip};
use rand::Rng as _;

use super::{glorot, ForwardCache, HeadError, Real};
use crate::rng::Rng;

/// `logits = W2 dropout(relu(W1 x + b1)) + b2`, with inverted dropout.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpHead<T> {
    /// `hidden x d`.
    pub w1: Array2<T>,
    pub b1: Array1<T>,
    /// `n_out x hidden`.
    pub w2: Array2<T>,
    pub b2: Array1<T>,
    pub dropout_p: f64,
}

impl<T: Real> MlpHead<T> {
    pub(crate) fn init(d: usize, hidden: usize, n_out: usize, dropout_p: f64, rng: &mut Rng) -> Self {
        assert!((0.0..1.0).contains(&dropout_p), "dropout_p must lie in [0, 1)");
        MlpHead {
            w1: glorot(hidden, d, rng),
            b1: Array1::zeros(hidden),
            w2: glorot(n_out, hidden, rng),
            b2: Array1::zeros(n_out),
            dropout_p,
        }
    }

    pub fn hidden_dim(&self) -> usize {
        self.w1.nrows()
    }

    /// Bernoulli(1 - p) keep mask per sample and hidden unit, pre-scaled by
    /// 1/(1 - p).
    pub fn sample_mask(&self, batch: usize, rng: &mut Rng) -> Array2<T> {
        let keep = 1.0 - self.dropout_p;
        let scale = T::lit(1.0 / keep);
        Array2::from_shape_simple_fn((batch, self.hidden_dim()), || {
            if rng.random::<f64>() < keep {
                scale
            } else {
                T::zero()
            }
        })
    }

    /// Forward pass with an explicit dropout mask (`None` = eval mode).
    pub fn forward_with_mask(
        &self,
        x: ArrayView2<T>,
        mask: Option<Array2<T>>,
    ) -> Result<(Array2<T>, ForwardCache<T>), HeadError> {
        let d = self.w1.ncols();
        if x.ncols() != d {
            return Err(HeadError::DimMismatch {
                expected: d,
                got: x.ncols(),
            });
        }
        let expected = (x.nrows(), self.hidden_dim());
        if let Some(m) = &mask {
            if m.dim() != expected {
                return Err(HeadError::MaskShape {
                    expected,
                    got: m.dim(),
                });
            }
        }
        let pre = x.dot(&self.w1.t()) + &self.b1;
        let mut hidden = pre.mapv(|v| if v > T::zero() { v } else { T::zero() });
        if let Some(m) = &mask {
            hidden *= m;
        }
        let logits = hidden.dot(&self.w2.t()) + &self.b2;
        let cache = ForwardCache {
            input: x.to_owned(),
            hidden_pre: Some(pre),
            hidden: Some(hidden),
            mask,
            n_out: self.w2.nrows(),
        };
        Ok((logits, cache))
    }

    pub(crate) fn backward(
        &self,
        cache: &ForwardCache<T>,
        g: ArrayView2<T>,
    ) -> Result<Self, HeadError> {
        let (Some(pre), Some(hidden)) = (&cache.hidden_pre, &cache.hidden) else {
            return Err(HeadError::CacheKind);
        };
        let gw2 = g.t().dot(hidden);
        let gb2 = g.sum_axis(Axis(0));
        let mut dh = g.dot(&self.w2);
        if let Some(m) = &cache.mask {
            dh *= m;
        }
        Zip::from(&mut dh).and(pre).for_each(|d, &p| {
            if p <= T::zero() {
                *d = T::zero();
            }
        });
        Ok(MlpHead {
            w1: dh.t().dot(&cache.input),
            b1: dh.sum_axis(Axis(0)),
            w2: gw2,
            b2: gb2,
            dropout_p: self.dropout_p,
        })
    }
}
