use ndarray::{Array2, ArrayView2, Zip};

use super::TrainError;
use crate::heads::Real;

/// Mean binary cross-entropy over all `B x C` entries in the stable form
/// `max(x,0) - x*y + ln(1 + exp(-|x|))`, and its gradient
/// `(sigmoid(x) - y) / (B*C)`. Accumulation is in `f64`.
pub fn bce_with_logits<T: Real>(
    logits: ArrayView2<T>,
    targets: ArrayView2<T>,
) -> Result<(f64, Array2<T>), TrainError> {
    if logits.dim() != targets.dim() {
        return Err(TrainError::ShapeMismatch {
            what: "targets",
            expected: logits.dim(),
            got: targets.dim(),
        });
    }
    let n = logits.len();
    if n == 0 {
        return Ok((0.0, Array2::zeros(logits.dim())));
    }
    let scale = 1.0 / n as f64;
    let mut total = 0.0f64;
    let mut grad = Array2::<T>::zeros(logits.dim());
    let mut bad = false;
    Zip::from(&mut grad)
        .and(&logits)
        .and(&targets)
        .for_each(|g, &x, &y| {
            let (x, y) = (x.as_f64(), y.as_f64());
            if !x.is_finite() || !(0.0..=1.0).contains(&y) {
                bad = true;
                return;
            }
            total += x.max(0.0) - x * y + (-x.abs()).exp().ln_1p();
            *g = T::lit((crate::eval::sigmoid(x) - y) * scale);
        });
    if bad {
        return Err(TrainError::NonFiniteInput);
    }
    Ok((total * scale, grad))
}
