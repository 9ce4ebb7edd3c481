use rand::seq::SliceRandom;
use thiserror::Error;

use crate::data::{DataError, Dataset};
use crate::rng::rng_from_seed;

#[derive(Debug, Error, PartialEq)]
pub enum SplitError {
    #[error("cannot split an empty dataset")]
    EmptyDataset,
    #[error("validation fraction {0} must lie strictly between 0 and 1")]
    BadFraction(f64),
    #[error(transparent)]
    Data(#[from] DataError),
}

/// Number of validation samples for `n` samples at `val_fraction`.
pub fn val_count(n: usize, val_fraction: f64) -> usize {
    (val_fraction * n as f64).round() as usize
}

/// Uniform, unstratified train/validation partition.
///
/// Both halves keep the original sample order; which samples land in the
/// validation half depends only on `seed`.
pub fn split_train_val(
    dataset: &Dataset,
    val_fraction: f64,
    seed: u64,
) -> Result<(Dataset, Dataset), SplitError> {
    if !(val_fraction > 0.0 && val_fraction < 1.0) {
        return Err(SplitError::BadFraction(val_fraction));
    }
    let n = dataset.len();
    if n == 0 {
        return Err(SplitError::EmptyDataset);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng_from_seed(seed));
    let mut in_val = vec![false; n];
    for &i in &order[..val_count(n, val_fraction)] {
        in_val[i] = true;
    }
    let (mut train, mut val) = (Vec::new(), Vec::new());
    for (s, v) in dataset.samples().iter().zip(in_val) {
        if v {
            val.push(s.clone());
        } else {
            train.push(s.clone());
        }
    }
    Ok((Dataset::new(train)?, Dataset::new(val)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Sample;
    use std::collections::HashSet;

    fn ds(n: u64) -> Dataset {
        Dataset::new((0..n).map(Sample::new).collect()).unwrap()
    }

    #[test]
    fn cardinality_and_disjointness() {
        let (train, val) = split_train_val(&ds(10), 0.2, 1).unwrap();
        assert_eq!((train.len(), val.len()), (8, 2));
        let a: HashSet<u64> = train.samples().iter().map(|s| s.id).collect();
        let b: HashSet<u64> = val.samples().iter().map(|s| s.id).collect();
        assert!(a.is_disjoint(&b));
        assert_eq!(a.union(&b).count(), 10);
    }

    #[test]
    fn deterministic_per_seed() {
        let d = ds(100);
        let ids = |x: &Dataset| x.samples().iter().map(|s| s.id).collect::<Vec<_>>();
        let (_, v1) = split_train_val(&d, 0.2, 5).unwrap();
        let (_, v2) = split_train_val(&d, 0.2, 5).unwrap();
        let (_, v3) = split_train_val(&d, 0.2, 6).unwrap();
        assert_eq!(ids(&v1), ids(&v2));
        assert_ne!(ids(&v1), ids(&v3));
    }

    #[test]
    fn full_scale_ratio() {
        // 647k images at 20% leaves roughly 518k / 129k.
        let n = 647_000;
        let v = val_count(n, 0.2);
        assert_eq!((n - v, v), (517_600, 129_400));
    }

    #[test]
    fn errors() {
        assert_eq!(
            split_train_val(&ds(0), 0.2, 1).unwrap_err(),
            SplitError::EmptyDataset
        );
        assert!(matches!(
            split_train_val(&ds(5), 1.0, 1),
            Err(SplitError::BadFraction(_))
        ));
    }
}
