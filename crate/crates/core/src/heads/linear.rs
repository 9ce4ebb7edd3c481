use ndarray::{Array1, Array2, ArrayView2, Axis};

use super::{glorot, ForwardCache, HeadError, Real};
use crate::rng::Rng;

/// `logits = x W^T + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearHead<T> {
    /// `n_out x d`.
    pub weight: Array2<T>,
    pub bias: Array1<T>,
}

impl<T: Real> LinearHead<T> {
    pub(crate) fn init(d: usize, n_out: usize, rng: &mut Rng) -> Self {
        LinearHead {
            weight: glorot(n_out, d, rng),
            bias: Array1::zeros(n_out),
        }
    }

    pub(crate) fn forward(
        &self,
        x: ArrayView2<T>,
    ) -> Result<(Array2<T>, ForwardCache<T>), HeadError> {
        let d = self.weight.ncols();
        if x.ncols() != d {
            return Err(HeadError::DimMismatch {
                expected: d,
                got: x.ncols(),
            });
        }
        let logits = x.dot(&self.weight.t()) + &self.bias;
        let cache = ForwardCache {
            input: x.to_owned(),
            hidden_pre: None,
            hidden: None,
            mask: None,
            n_out: self.weight.nrows(),
        };
        Ok((logits, cache))
    }

    pub(crate) fn backward(
        &self,
        cache: &ForwardCache<T>,
        g: ArrayView2<T>,
    ) -> Result<Self, HeadError> {
        if cache.hidden.is_some() {
            return Err(HeadError::CacheKind);
        }
        Ok(LinearHead {
            weight: g.t().dot(&cache.input),
            bias: g.sum_axis(Axis(0)),
        })
    }
}
