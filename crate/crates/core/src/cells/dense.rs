use serde::{Deserialize, Serialize};

use super::{check_len, ParamSet};
use crate::error::{Error, Result};
use crate::numerics::{fan_in_scale, relu, sigmoid, uniform_init, Matrix, Rng};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Identity,
    Sigmoid,
    Tanh,
}

impl Activation {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => relu(x),
            Activation::Identity => x,
            Activation::Sigmoid => sigmoid(x),
            Activation::Tanh => x.tanh(),
        }
    }

    /// Derivative expressed through the pre-activation `a` and output `y`.
    #[inline]
    fn derivative(self, a: f64, y: f64) -> f64 {
        match self {
            Activation::Relu => {
                if a > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Identity => 1.0,
            Activation::Sigmoid => y * (1.0 - y),
            Activation::Tanh => 1.0 - y * y,
        }
    }
}

/// `y = act(W x + b)` with `W: out × in`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseParams {
    pub w: Matrix,
    pub b: Vec<f64>,
    pub activation: Activation,
}

#[derive(Clone, Debug)]
pub struct DenseCache {
    x: Vec<f64>,
    pre: Vec<f64>,
    y: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct DenseBackward {
    pub params: DenseParams,
    pub dx: Vec<f64>,
}

impl DenseParams {
    pub fn new(w: Matrix, b: Vec<f64>, activation: Activation) -> Result<Self> {
        let p = DenseParams { w, b, activation };
        p.validate()?;
        Ok(p)
    }

    pub fn zeros(input: usize, output: usize, activation: Activation) -> Self {
        DenseParams {
            w: Matrix::zeros(output, input),
            b: vec![0.0; output],
            activation,
        }
    }

    /// Weights uniform in `±1/√input`, biases zero.
    pub fn init(rng: &mut Rng, input: usize, output: usize, activation: Activation) -> Self {
        DenseParams {
            w: uniform_init(rng, output, input, fan_in_scale(input)).expect("positive scale"),
            b: vec![0.0; output],
            activation,
        }
    }

    pub fn input_size(&self) -> usize {
        self.w.cols()
    }

    pub fn output_size(&self) -> usize {
        self.w.rows()
    }

    pub fn validate(&self) -> Result<()> {
        if self.b.len() != self.w.rows() {
            return Err(Error::shape(
                "DenseParams",
                format!(
                    "bias length {} for {}x{} weights",
                    self.b.len(),
                    self.w.rows(),
                    self.w.cols()
                ),
            ));
        }
        Ok(())
    }

    pub fn forward(&self, x: &[f64]) -> Result<(Vec<f64>, DenseCache)> {
        check_len("dense_forward", "x", x.len(), self.input_size())?;
        Ok(self.forward_unchecked(x))
    }

    pub(crate) fn forward_unchecked(&self, x: &[f64]) -> (Vec<f64>, DenseCache) {
        let mut pre = self.b.clone();
        self.w.matvec_acc(x, &mut pre);
        let y: Vec<f64> = pre.iter().map(|&a| self.activation.apply(a)).collect();
        let cache = DenseCache {
            x: x.to_vec(),
            pre,
            y: y.clone(),
        };
        (y, cache)
    }

    pub fn backward(&self, cache: &DenseCache, dy: &[f64]) -> Result<DenseBackward> {
        check_len("dense_backward", "grad_y", dy.len(), self.output_size())?;
        check_len("dense_backward", "cache input", cache.x.len(), self.input_size())?;
        let mut params = DenseParams::zeros(self.input_size(), self.output_size(), self.activation);
        let mut dx = vec![0.0; self.input_size()];
        self.backward_acc(cache, dy, &mut params, &mut dx);
        Ok(DenseBackward { params, dx })
    }

    pub(crate) fn backward_acc(&self, cache: &DenseCache, dy: &[f64], grads: &mut DenseParams, dx: &mut [f64]) {
        let da: Vec<f64> = dy
            .iter()
            .zip(cache.pre.iter().zip(&cache.y))
            .map(|(&d, (&a, &y))| d * self.activation.derivative(a, y))
            .collect();
        grads.w.add_outer(&da, &cache.x);
        grads.b.iter_mut().zip(&da).for_each(|(b, d)| *b += d);
        dx.fill(0.0);
        self.w.t_matvec_acc(&da, dx);
    }
}

impl ParamSet for DenseParams {
    fn tensors(&self) -> Vec<&[f64]> {
        vec![self.w.as_slice(), &self.b]
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        vec![self.w.as_mut_slice(), &mut self.b]
    }
}
