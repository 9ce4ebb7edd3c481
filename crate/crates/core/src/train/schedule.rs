/// Cosine-annealed learning rate for `epoch`, held at `lr_min` once
/// `epoch >= t_max`.
pub fn cosine_lr(epoch: usize, lr_max: f64, lr_min: f64, t_max: usize) -> f64 {
    assert!(t_max >= 1, "t_max must be at least 1");
    let t = epoch.min(t_max) as f64 / t_max as f64;
    lr_min + 0.5 * (lr_max - lr_min) * (1.0 + (std::f64::consts::PI * t).cos())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_and_midpoint() {
        assert_eq!(cosine_lr(0, 1e-3, 0.0, 50), 1e-3);
        assert_eq!(cosine_lr(50, 1e-3, 0.0, 50), 0.0);
        assert!((cosine_lr(25, 1e-3, 0.0, 50) - 5e-4).abs() < 1e-15);
        assert_eq!(cosine_lr(51, 1e-3, 1e-5, 50), 1e-5);
        assert_eq!(cosine_lr(200, 1e-3, 1e-5, 50), 1e-5);
    }

    #[test]
    fn non_increasing() {
        let mut prev = f64::INFINITY;
        for e in 0..80 {
            let lr = cosine_lr(e, 1e-2, 1e-4, 50);
            assert!(lr <= prev);
            prev = lr;
        }
    }
}
