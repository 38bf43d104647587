use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    Sgd,
    #[default]
    Adam,
}

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPS: f64 = 1e-8;

/// Plain SGD or Adam over a flat parameter vector.
#[derive(Clone, Debug)]
pub struct Optimizer {
    kind: OptimizerKind,
    lr: f64,
    step: u64,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, lr: f64, num_params: usize) -> Self {
        let moments = match kind {
            OptimizerKind::Sgd => 0,
            OptimizerKind::Adam => num_params,
        };
        Optimizer {
            kind,
            lr,
            step: 0,
            m: vec![0.0; moments],
            v: vec![0.0; moments],
        }
    }

    /// Applies one update. `params` and `grads` are visited in lockstep as
    /// sequences of tensors flattened in the same order.
    pub fn update<'a>(
        &mut self,
        params: impl IntoIterator<Item = &'a mut [f64]>,
        grads: impl IntoIterator<Item = &'a [f64]>,
    ) {
        self.step += 1;
        let lr = self.lr;
        let p = params.into_iter().flat_map(|t| t.iter_mut());
        let g = grads.into_iter().flat_map(|t| t.iter());
        match self.kind {
            OptimizerKind::Sgd => {
                for (p, g) in p.zip(g) {
                    *p -= lr * g;
                }
            }
            OptimizerKind::Adam => {
                let t = self.step as i32;
                let bc1 = 1.0 - ADAM_BETA1.powi(t);
                let bc2 = 1.0 - ADAM_BETA2.powi(t);
                for (((p, &g), m), v) in p.zip(g).zip(self.m.iter_mut()).zip(self.v.iter_mut()) {
                    *m = ADAM_BETA1 * *m + (1.0 - ADAM_BETA1) * g;
                    *v = ADAM_BETA2 * *v + (1.0 - ADAM_BETA2) * g * g;
                    let m_hat = *m / bc1;
                    let v_hat = *v / bc2;
                    *p -= lr * m_hat / (v_hat.sqrt() + ADAM_EPS);
                }
            }
        }
    }
}

/// Rescales `grads` in place so their global L2 norm is at most `max_norm`.
/// Returns the norm before clipping.
pub fn clip_global_norm<'a>(grads: impl IntoIterator<Item = &'a mut [f64]>, max_norm: f64) -> f64 {
    let mut tensors: Vec<&mut [f64]> = grads.into_iter().collect();
    let norm = tensors.iter().flat_map(|t| t.iter()).map(|g| g * g).sum::<f64>().sqrt();
    if norm > max_norm && norm.is_finite() {
        let k = max_norm / norm;
        for t in tensors.iter_mut() {
            t.iter_mut().for_each(|g| *g *= k);
        }
    }
    norm
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adam_first_step_moves_by_learning_rate() {
        let mut opt = Optimizer::new(OptimizerKind::Adam, 0.1, 2);
        let mut p = vec![1.0, -1.0];
        opt.update([p.as_mut_slice()], [&[0.5, -3.0][..]]);
        assert!((p[0] - 0.9).abs() < 1e-6);
        assert!((p[1] + 0.9).abs() < 1e-6);
    }

    #[test]
    fn sgd_step() {
        let mut opt = Optimizer::new(OptimizerKind::Sgd, 0.5, 1);
        let mut p = vec![2.0];
        opt.update([p.as_mut_slice()], [&[1.0][..]]);
        assert_eq!(p, vec![1.5]);
    }

    #[test]
    fn clipping_caps_norm() {
        let mut a = vec![3.0];
        let mut b = vec![4.0];
        let n = clip_global_norm([a.as_mut_slice(), b.as_mut_slice()], 1.0);
        assert_eq!(n, 5.0);
        assert!((a[0] - 0.6).abs() < 1e-15 && (b[0] - 0.8).abs() < 1e-15);
        let mut c = vec![0.1];
        clip_global_norm([c.as_mut_slice()], 1.0);
        assert_eq!(c, vec![0.1]);
    }
}
