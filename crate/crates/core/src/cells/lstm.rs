use serde::{Deserialize, Serialize};

use super::{check_len, ParamSet};
use crate::error::{Error, Result};
use crate::numerics::{fan_in_scale, sigmoid, uniform_init, Matrix, Rng};

/// LSTM gate weights. Every `w_*` is `hidden × (hidden + input)` and acts on
/// the concatenation `[h_{t-1}, x_t]` (hidden first).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LstmParams {
    pub w_f: Matrix,
    pub w_i: Matrix,
    pub w_c: Matrix,
    pub w_o: Matrix,
    pub b_f: Vec<f64>,
    pub b_i: Vec<f64>,
    pub b_c: Vec<f64>,
    pub b_o: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LstmState {
    pub h: Vec<f64>,
    pub c: Vec<f64>,
}

impl LstmState {
    pub fn zeros(hidden: usize) -> Self {
        LstmState {
            h: vec![0.0; hidden],
            c: vec![0.0; hidden],
        }
    }
}

/// Gradient of the loss with respect to an [`LstmState`].
#[derive(Clone, Debug, PartialEq)]
pub struct LstmStateGrad {
    pub dh: Vec<f64>,
    pub dc: Vec<f64>,
}

impl LstmStateGrad {
    pub fn zeros(hidden: usize) -> Self {
        LstmStateGrad {
            dh: vec![0.0; hidden],
            dc: vec![0.0; hidden],
        }
    }
}

#[derive(Clone, Debug)]
pub struct LstmCache {
    concat: Vec<f64>,
    c_prev: Vec<f64>,
    f: Vec<f64>,
    i: Vec<f64>,
    g: Vec<f64>,
    o: Vec<f64>,
    tanh_c: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct LstmBackward {
    pub params: LstmParams,
    pub dx: Vec<f64>,
    pub dprev: LstmStateGrad,
}

impl LstmParams {
    pub fn zeros(input: usize, hidden: usize) -> Self {
        let w = || Matrix::zeros(hidden, hidden + input);
        LstmParams {
            w_f: w(),
            w_i: w(),
            w_c: w(),
            w_o: w(),
            b_f: vec![0.0; hidden],
            b_i: vec![0.0; hidden],
            b_c: vec![0.0; hidden],
            b_o: vec![0.0; hidden],
        }
    }

    /// Weights uniform in `±1/√(hidden+input)`, biases zero.
    pub fn init(rng: &mut Rng, input: usize, hidden: usize) -> Self {
        let scale = fan_in_scale(hidden + input);
        let mut w = || uniform_init(rng, hidden, hidden + input, scale).expect("positive scale");
        LstmParams {
            w_f: w(),
            w_i: w(),
            w_c: w(),
            w_o: w(),
            b_f: vec![0.0; hidden],
            b_i: vec![0.0; hidden],
            b_c: vec![0.0; hidden],
            b_o: vec![0.0; hidden],
        }
    }

    pub fn hidden_size(&self) -> usize {
        self.w_f.rows()
    }

    pub fn input_size(&self) -> usize {
        self.w_f.cols() - self.w_f.rows()
    }

    pub fn validate(&self) -> Result<()> {
        let (h, n) = self.w_f.shape();
        if n < h {
            return Err(Error::shape("LstmParams", format!("w_f is {h}x{n}")));
        }
        for (name, w) in [("w_i", &self.w_i), ("w_c", &self.w_c), ("w_o", &self.w_o)] {
            if w.shape() != (h, n) {
                return Err(Error::shape(
                    "LstmParams",
                    format!("{name} is {:?}, expected ({h}, {n})", w.shape()),
                ));
            }
        }
        for (name, b) in [
            ("b_f", &self.b_f),
            ("b_i", &self.b_i),
            ("b_c", &self.b_c),
            ("b_o", &self.b_o),
        ] {
            check_len("LstmParams", name, b.len(), h)?;
        }
        Ok(())
    }

    pub fn forward(&self, x: &[f64], prev: &LstmState) -> Result<(LstmState, LstmCache)> {
        let hidden = self.hidden_size();
        check_len("lstm_forward", "x", x.len(), self.input_size())?;
        check_len("lstm_forward", "prev.h", prev.h.len(), hidden)?;
        check_len("lstm_forward", "prev.c", prev.c.len(), hidden)?;
        Ok(self.forward_unchecked(x, &prev.h, &prev.c))
    }

    pub(crate) fn forward_unchecked(&self, x: &[f64], h_prev: &[f64], c_prev: &[f64]) -> (LstmState, LstmCache) {
        let mut concat = Vec::with_capacity(h_prev.len() + x.len());
        concat.extend_from_slice(h_prev);
        concat.extend_from_slice(x);

        let gate = |w: &Matrix, b: &[f64], act: fn(f64) -> f64| {
            let mut z = b.to_vec();
            w.matvec_acc(&concat, &mut z);
            z.iter_mut().for_each(|v| *v = act(*v));
            z
        };
        let f = gate(&self.w_f, &self.b_f, sigmoid);
        let i = gate(&self.w_i, &self.b_i, sigmoid);
        let g = gate(&self.w_c, &self.b_c, f64::tanh);
        let o = gate(&self.w_o, &self.b_o, sigmoid);

        let c: Vec<f64> = (0..f.len()).map(|k| f[k] * c_prev[k] + i[k] * g[k]).collect();
        let tanh_c: Vec<f64> = c.iter().map(|v| v.tanh()).collect();
        let h: Vec<f64> = o.iter().zip(&tanh_c).map(|(o, t)| o * t).collect();

        let cache = LstmCache {
            concat,
            c_prev: c_prev.to_vec(),
            f,
            i,
            g,
            o,
            tanh_c,
        };
        (LstmState { h, c }, cache)
    }

    pub fn backward(&self, cache: &LstmCache, grad_next: &LstmStateGrad) -> Result<LstmBackward> {
        let hidden = self.hidden_size();
        check_len("lstm_backward", "cache", cache.f.len(), hidden)?;
        check_len("lstm_backward", "cache input", cache.concat.len(), self.w_f.cols())?;
        check_len("lstm_backward", "grad.dh", grad_next.dh.len(), hidden)?;
        check_len("lstm_backward", "grad.dc", grad_next.dc.len(), hidden)?;
        let mut params = LstmParams::zeros(self.input_size(), hidden);
        let mut dx = vec![0.0; self.input_size()];
        let mut dprev = LstmStateGrad::zeros(hidden);
        self.backward_acc(cache, &grad_next.dh, &grad_next.dc, &mut params, &mut dx, &mut dprev);
        Ok(LstmBackward { params, dx, dprev })
    }

    /// Accumulates parameter gradients into `grads` and overwrites `dx` and `dprev`.
    pub(crate) fn backward_acc(
        &self,
        cache: &LstmCache,
        dh: &[f64],
        dc_next: &[f64],
        grads: &mut LstmParams,
        dx: &mut [f64],
        dprev: &mut LstmStateGrad,
    ) {
        let hidden = self.hidden_size();
        let mut dz_f = vec![0.0; hidden];
        let mut dz_i = vec![0.0; hidden];
        let mut dz_g = vec![0.0; hidden];
        let mut dz_o = vec![0.0; hidden];
        for k in 0..hidden {
            let (f, i, g, o, tc) = (cache.f[k], cache.i[k], cache.g[k], cache.o[k], cache.tanh_c[k]);
            let dc = dc_next[k] + dh[k] * o * (1.0 - tc * tc);
            dz_o[k] = dh[k] * tc * o * (1.0 - o);
            dz_f[k] = dc * cache.c_prev[k] * f * (1.0 - f);
            dz_i[k] = dc * g * i * (1.0 - i);
            dz_g[k] = dc * i * (1.0 - g * g);
            dprev.dc[k] = dc * f;
        }

        let mut dconcat = vec![0.0; cache.concat.len()];
        for (w, gw, gb, dz) in [
            (&self.w_f, &mut grads.w_f, &mut grads.b_f, &dz_f),
            (&self.w_i, &mut grads.w_i, &mut grads.b_i, &dz_i),
            (&self.w_c, &mut grads.w_c, &mut grads.b_c, &dz_g),
            (&self.w_o, &mut grads.w_o, &mut grads.b_o, &dz_o),
        ] {
            gw.add_outer(dz, &cache.concat);
            gb.iter_mut().zip(dz.iter()).for_each(|(b, d)| *b += d);
            w.t_matvec_acc(dz, &mut dconcat);
        }
        dprev.dh.copy_from_slice(&dconcat[..hidden]);
        dx.copy_from_slice(&dconcat[hidden..]);
    }
}

impl ParamSet for LstmParams {
    fn tensors(&self) -> Vec<&[f64]> {
        vec![
            self.w_f.as_slice(),
            self.w_i.as_slice(),
            self.w_c.as_slice(),
            self.w_o.as_slice(),
            &self.b_f,
            &self.b_i,
            &self.b_c,
            &self.b_o,
        ]
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        vec![
            self.w_f.as_mut_slice(),
            self.w_i.as_mut_slice(),
            self.w_c.as_mut_slice(),
            self.w_o.as_mut_slice(),
            &mut self.b_f,
            &mut self.b_i,
            &mut self.b_c,
            &mut self.b_o,
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_parameters_give_zero_state() {
        let p = LstmParams::zeros(3, 4);
        let (next, cache) = p.forward(&[0.0; 3], &LstmState::zeros(4)).unwrap();
        assert_eq!(next.h, vec![0.0; 4]);
        assert_eq!(next.c, vec![0.0; 4]);
        assert!(cache.f.iter().chain(&cache.i).chain(&cache.o).all(|&g| g == 0.5));
        assert!(cache.g.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn saturated_forget_gate_drops_previous_cell() {
        let mut rng = Rng::new(3);
        let mut p = LstmParams::zeros(2, 3);
        p.b_f = vec![-40.0; 3];
        p.w_i = uniform_init(&mut rng, 3, 5, 0.5).unwrap();
        p.w_c = uniform_init(&mut rng, 3, 5, 0.5).unwrap();
        let prev = LstmState {
            h: vec![0.1, -0.2, 0.3],
            c: vec![5.0, -7.0, 11.0],
        };
        let (next, cache) = p.forward(&[0.4, -0.9], &prev).unwrap();
        for k in 0..3 {
            assert!((next.c[k] - cache.i[k] * cache.g[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_shapes() {
        let p = LstmParams::zeros(3, 2);
        assert!(p.forward(&[0.0; 2], &LstmState::zeros(2)).is_err());
        assert!(p.forward(&[0.0; 3], &LstmState::zeros(3)).is_err());
        let (_, cache) = p.forward(&[0.0; 3], &LstmState::zeros(2)).unwrap();
        assert!(p.backward(&cache, &LstmStateGrad::zeros(3)).is_err());
        let other = LstmParams::zeros(4, 2);
        assert!(other.backward(&cache, &LstmStateGrad::zeros(2)).is_err());
    }

    #[test]
    fn zero_upstream_gives_zero_gradients() {
        let mut rng = Rng::new(11);
        let p = LstmParams::init(&mut rng, 3, 4);
        let prev = LstmState {
            h: vec![0.2; 4],
            c: vec![-0.5; 4],
        };
        let (_, cache) = p.forward(&[0.3, 0.1, -0.7], &prev).unwrap();
        let back = p.backward(&cache, &LstmStateGrad::zeros(4)).unwrap();
        assert!(back.params.tensors().iter().all(|t| t.iter().all(|&v| v == 0.0)));
        assert!(back
            .dx
            .iter()
            .chain(&back.dprev.dh)
            .chain(&back.dprev.dc)
            .all(|&v| v == 0.0));
    }
}
