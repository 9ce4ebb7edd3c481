use ndarray::{Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand_distr::{Beta, Distribution};

use super::TrainError;
use crate::heads::Real;
use crate::rng::Rng;

/// Draws `lambda ~ Beta(alpha, alpha)`.
pub fn sample_lambda(alpha: f64, rng: &mut Rng) -> Result<f64, TrainError> {
    let beta = Beta::new(alpha, alpha).map_err(|_| TrainError::BadAlpha(alpha))?;
    Ok(beta.sample(rng))
}

/// Convex combination of each row with row `perm[i]`:
/// `lambdas[i]*x + (1-lambdas[i])*x[perm]`, same for `y`. `lambdas` holds
/// either one value for the whole batch or one per row. Mixed labels are
/// clamped to `[0, 1]` against rounding.
pub fn mixup_with<T: Real>(
    x: ArrayView2<T>,
    y: ArrayView2<T>,
    lambdas: &[f64],
    perm: &[usize],
) -> (Array2<T>, Array2<T>) {
    let b = x.nrows();
    assert_eq!(y.nrows(), b);
    assert_eq!(perm.len(), b);
    assert!(lambdas.len() == 1 || lambdas.len() == b);
    let mix = |a: ArrayView2<T>, clamp: bool| {
        let mut out = Array2::<T>::zeros(a.dim());
        for (i, mut row) in out.axis_iter_mut(Axis(0)).enumerate() {
            let lam = lambdas[if lambdas.len() == 1 { 0 } else { i }];
            let (l, r) = (T::lit(lam), T::lit(1.0 - lam));
            let (ai, aj) = (a.row(i), a.row(perm[i]));
            for k in 0..row.len() {
                let mut v = l * ai[k] + r * aj[k];
                if clamp {
                    v = v.max(T::zero()).min(T::one());
                }
                row[k] = v;
            }
        }
        out
    };
    (mix(x, false), mix(y, true))
}

/// MixUp over a batch with a random row permutation and one `lambda` per
/// batch (or per row when `per_sample`).
pub fn mixup<T: Real>(
    x: ArrayView2<T>,
    y: ArrayView2<T>,
    alpha: f64,
    per_sample: bool,
    rng: &mut Rng,
) -> Result<(Array2<T>, Array2<T>), TrainError> {
    let b = x.nrows();
    if b < 2 {
        return Err(TrainError::BatchTooSmall(b));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(TrainError::BadAlpha(alpha));
    }
    let lambdas = (0..if per_sample { b } else { 1 })
        .map(|_| sample_lambda(alpha, rng))
        .collect::<Result<Vec<_>, _>>()?;
    let mut perm: Vec<usize> = (0..b).collect();
    perm.shuffle(rng);
    Ok(mixup_with(x, y, &lambdas, &perm))
}
