use std::fmt;
use std::str::FromStr;

use super::TrainError;
use crate::heads::{Head, Real};

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPS: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimizerKind {
    Adam,
    Sgd,
}

impl OptimizerKind {
    pub fn name(self) -> &'static str {
        match self {
            OptimizerKind::Adam => "adam",
            OptimizerKind::Sgd => "sgd",
        }
    }
}

impl fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OptimizerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "adam" => Ok(OptimizerKind::Adam),
            "sgd" => Ok(OptimizerKind::Sgd),
            other => Err(format!("unknown optimizer {other:?} (expected adam or sgd)")),
        }
    }
}

/// Moment estimates and step count. Moments are kept in `f64` whatever the
/// parameter type.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    pub kind: OptimizerKind,
    pub step: u64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl OptimizerState {
    pub fn new<T: Real>(kind: OptimizerKind, head: &Head<T>) -> Self {
        let shapes: Vec<usize> = head.params().iter().map(|p| p.len()).collect();
        let zeros = || shapes.iter().map(|&n| vec![0.0; n]).collect();
        let (m, v) = match kind {
            OptimizerKind::Adam => (zeros(), zeros()),
            OptimizerKind::Sgd => (Vec::new(), Vec::new()),
        };
        OptimizerState { kind, step: 0, m, v }
    }
}

/// One in-place update of `head` from `grads` (shaped like the head).
pub fn optimizer_step<T: Real>(
    head: &mut Head<T>,
    grads: &Head<T>,
    state: &mut OptimizerState,
    lr: f64,
) -> Result<(), TrainError> {
    let g_params = grads.params();
    let shape_err = || TrainError::OptimizerShape {
        expected: head.num_params(),
        got: grads.num_params(),
    };
    if head.kind() != grads.kind() {
        return Err(shape_err());
    }
    let lens: Vec<usize> = head.params().iter().map(|p| p.len()).collect();
    if lens != g_params.iter().map(|p| p.len()).collect::<Vec<_>>() {
        return Err(shape_err());
    }
    state.step += 1;
    match state.kind {
        OptimizerKind::Sgd => {
            for (p, g) in head.params_mut().into_iter().zip(&g_params) {
                for (p, g) in p.iter_mut().zip(g.iter()) {
                    *p = T::lit(p.as_f64() - lr * g.as_f64());
                }
            }
        }
        OptimizerKind::Adam => {
            if state.m.iter().map(Vec::len).collect::<Vec<_>>() != lens {
                return Err(shape_err());
            }
            let t = state.step as i32;
            let c1 = 1.0 - ADAM_BETA1.powi(t);
            let c2 = 1.0 - ADAM_BETA2.powi(t);
            for (k, (p, g)) in head.params_mut().into_iter().zip(&g_params).enumerate() {
                let (m, v) = (&mut state.m[k], &mut state.v[k]);
                for i in 0..p.len() {
                    let g = g[i].as_f64();
                    m[i] = ADAM_BETA1 * m[i] + (1.0 - ADAM_BETA1) * g;
                    v[i] = ADAM_BETA2 * v[i] + (1.0 - ADAM_BETA2) * g * g;
                    let step = lr * (m[i] / c1) / ((v[i] / c2).sqrt() + ADAM_EPS);
                    p[i] = T::lit(p[i].as_f64() - step);
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heads::{init_head, HeadKind};

    fn fill<T: Real>(h: &mut Head<T>, v: f64) {
        for p in h.params_mut() {
            p.fill(T::lit(v));
        }
    }

    #[test]
    fn adam_first_step_is_sign_of_gradient() {
        let mut h = init_head::<f64>(HeadKind::Linear, 4, 1);
        let before = h.clone();
        let mut g = h.zeros_like();
        for (i, p) in g.params_mut().into_iter().enumerate() {
            for (j, v) in p.iter_mut().enumerate() {
                *v = if (i + j) % 2 == 0 { 0.3 } else { -2.0 };
            }
        }
        let mut st = OptimizerState::new(OptimizerKind::Adam, &h);
        optimizer_step(&mut h, &g, &mut st, 1e-3).unwrap();
        for ((a, b), g) in h.params().iter().zip(before.params()).zip(g.params()) {
            for k in 0..a.len() {
                let delta = a[k] - b[k];
                assert!((delta + 1e-3 * g[k].signum()).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn zero_gradient_is_a_fixed_point() {
        for kind in [OptimizerKind::Adam, OptimizerKind::Sgd] {
            let mut h = init_head::<f32>(HeadKind::Mlp, 6, 2);
            let before = h.clone();
            let g = h.zeros_like();
            let mut st = OptimizerState::new(kind, &h);
            for _ in 0..3 {
                optimizer_step(&mut h, &g, &mut st, 0.1).unwrap();
            }
            assert_eq!(h, before);
        }
    }

    #[test]
    fn sgd_step() {
        let mut h = init_head::<f64>(HeadKind::Linear, 3, 1);
        fill(&mut h, 1.0);
        let mut g = h.zeros_like();
        fill(&mut g, 1.0);
        let mut st = OptimizerState::new(OptimizerKind::Sgd, &h);
        optimizer_step(&mut h, &g, &mut st, 0.1).unwrap();
        assert!(h.params().iter().all(|p| p.iter().all(|&v| v == 1.0 - 0.1)));
    }

    #[test]
    fn mismatched_gradients() {
        let mut h = init_head::<f64>(HeadKind::Linear, 3, 1);
        let g = init_head::<f64>(HeadKind::Linear, 4, 1);
        let mut st = OptimizerState::new(OptimizerKind::Adam, &h);
        assert!(matches!(
            optimizer_step(&mut h, &g, &mut st, 0.1),
            Err(TrainError::OptimizerShape { .. })
        ));
    }
}
