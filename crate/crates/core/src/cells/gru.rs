use serde::{Deserialize, Serialize};

use super::{check_len, ParamSet};
use crate::error::{Error, Result};
use crate::numerics::{fan_in_scale, sigmoid, uniform_init, Matrix, Rng};

/// GRU weights. Gates:
///
/// ```text
/// z  = σ(W_z x + U_z h + b_z)
/// r  = σ(W_r x + U_r h + b_r)
/// h~ = tanh(W_h x + U_h (r ⊙ h) + b_h)
/// h' = (1 − z) ⊙ h + z ⊙ h~
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GruParams {
    pub w_z: Matrix,
    pub w_r: Matrix,
    pub w_h: Matrix,
    pub u_z: Matrix,
    pub u_r: Matrix,
    pub u_h: Matrix,
    pub b_z: Vec<f64>,
    pub b_r: Vec<f64>,
    pub b_h: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct GruCache {
    x: Vec<f64>,
    h_prev: Vec<f64>,
    z: Vec<f64>,
    r: Vec<f64>,
    rh: Vec<f64>,
    candidate: Vec<f64>,
}

impl GruCache {
    pub fn candidate(&self) -> &[f64] {
        &self.candidate
    }

    pub fn update_gate(&self) -> &[f64] {
        &self.z
    }
}

#[derive(Clone, Debug)]
pub struct GruBackward {
    pub params: GruParams,
    pub dx: Vec<f64>,
    pub dh_prev: Vec<f64>,
}

impl GruParams {
    pub fn zeros(input: usize, hidden: usize) -> Self {
        GruParams {
            w_z: Matrix::zeros(hidden, input),
            w_r: Matrix::zeros(hidden, input),
            w_h: Matrix::zeros(hidden, input),
            u_z: Matrix::zeros(hidden, hidden),
            u_r: Matrix::zeros(hidden, hidden),
            u_h: Matrix::zeros(hidden, hidden),
            b_z: vec![0.0; hidden],
            b_r: vec![0.0; hidden],
            b_h: vec![0.0; hidden],
        }
    }

    /// Weights uniform in `±1/√(hidden+input)`, biases zero.
    pub fn init(rng: &mut Rng, input: usize, hidden: usize) -> Self {
        let scale = fan_in_scale(hidden + input);
        let mut w = |cols| uniform_init(rng, hidden, cols, scale).expect("positive scale");
        GruParams {
            w_z: w(input),
            w_r: w(input),
            w_h: w(input),
            u_z: w(hidden),
            u_r: w(hidden),
            u_h: w(hidden),
            b_z: vec![0.0; hidden],
            b_r: vec![0.0; hidden],
            b_h: vec![0.0; hidden],
        }
    }

    pub fn hidden_size(&self) -> usize {
        self.w_z.rows()
    }

    pub fn input_size(&self) -> usize {
        self.w_z.cols()
    }

    pub fn validate(&self) -> Result<()> {
        let (h, n) = self.w_z.shape();
        for (name, m, want) in [
            ("w_r", &self.w_r, (h, n)),
            ("w_h", &self.w_h, (h, n)),
            ("u_z", &self.u_z, (h, h)),
            ("u_r", &self.u_r, (h, h)),
            ("u_h", &self.u_h, (h, h)),
        ] {
            if m.shape() != want {
                return Err(Error::shape(
                    "GruParams",
                    format!("{name} is {:?}, expected {want:?}", m.shape()),
                ));
            }
        }
        for (name, b) in [("b_z", &self.b_z), ("b_r", &self.b_r), ("b_h", &self.b_h)] {
            check_len("GruParams", name, b.len(), h)?;
        }
        Ok(())
    }

    pub fn forward(&self, x: &[f64], h_prev: &[f64]) -> Result<(Vec<f64>, GruCache)> {
        check_len("gru_forward", "x", x.len(), self.input_size())?;
        check_len("gru_forward", "prev.h", h_prev.len(), self.hidden_size())?;
        Ok(self.forward_unchecked(x, h_prev))
    }

    pub(crate) fn forward_unchecked(&self, x: &[f64], h_prev: &[f64]) -> (Vec<f64>, GruCache) {
        let gate = |w: &Matrix, u: &Matrix, b: &[f64]| {
            let mut a = b.to_vec();
            w.matvec_acc(x, &mut a);
            u.matvec_acc(h_prev, &mut a);
            a.iter_mut().for_each(|v| *v = sigmoid(*v));
            a
        };
        let z = gate(&self.w_z, &self.u_z, &self.b_z);
        let r = gate(&self.w_r, &self.u_r, &self.b_r);
        let rh: Vec<f64> = r.iter().zip(h_prev).map(|(r, h)| r * h).collect();

        let mut candidate = self.b_h.clone();
        self.w_h.matvec_acc(x, &mut candidate);
        self.u_h.matvec_acc(&rh, &mut candidate);
        candidate.iter_mut().for_each(|v| *v = v.tanh());

        let h: Vec<f64> = (0..z.len())
            .map(|k| (1.0 - z[k]) * h_prev[k] + z[k] * candidate[k])
            .collect();
        let cache = GruCache {
            x: x.to_vec(),
            h_prev: h_prev.to_vec(),
            z,
            r,
            rh,
            candidate,
        };
        (h, cache)
    }

    pub fn backward(&self, cache: &GruCache, dh_next: &[f64]) -> Result<GruBackward> {
        check_len("gru_backward", "cache", cache.z.len(), self.hidden_size())?;
        check_len("gru_backward", "cache input", cache.x.len(), self.input_size())?;
        check_len("gru_backward", "grad.dh", dh_next.len(), self.hidden_size())?;
        let mut params = GruParams::zeros(self.input_size(), self.hidden_size());
        let mut dx = vec![0.0; self.input_size()];
        let mut dh_prev = vec![0.0; self.hidden_size()];
        self.backward_acc(cache, dh_next, &mut params, &mut dx, &mut dh_prev);
        Ok(GruBackward { params, dx, dh_prev })
    }

    /// Accumulates parameter gradients into `grads` and overwrites `dx` and `dh_prev`.
    pub(crate) fn backward_acc(
        &self,
        cache: &GruCache,
        dh: &[f64],
        grads: &mut GruParams,
        dx: &mut [f64],
        dh_prev: &mut [f64],
    ) {
        let hidden = self.hidden_size();
        let mut da_z = vec![0.0; hidden];
        let mut da_h = vec![0.0; hidden];
        for k in 0..hidden {
            let (z, c, hp) = (cache.z[k], cache.candidate[k], cache.h_prev[k]);
            da_z[k] = dh[k] * (c - hp) * z * (1.0 - z);
            da_h[k] = dh[k] * z * (1.0 - c * c);
            dh_prev[k] = dh[k] * (1.0 - z);
        }

        // candidate branch: a_h = W_h x + U_h (r ⊙ h) + b_h
        let mut d_rh = vec![0.0; hidden];
        self.u_h.t_matvec_acc(&da_h, &mut d_rh);
        let mut da_r = vec![0.0; hidden];
        for k in 0..hidden {
            let r = cache.r[k];
            da_r[k] = d_rh[k] * cache.h_prev[k] * r * (1.0 - r);
            dh_prev[k] += d_rh[k] * r;
        }

        grads.w_z.add_outer(&da_z, &cache.x);
        grads.w_r.add_outer(&da_r, &cache.x);
        grads.w_h.add_outer(&da_h, &cache.x);
        grads.u_z.add_outer(&da_z, &cache.h_prev);
        grads.u_r.add_outer(&da_r, &cache.h_prev);
        grads.u_h.add_outer(&da_h, &cache.rh);
        for k in 0..hidden {
            grads.b_z[k] += da_z[k];
            grads.b_r[k] += da_r[k];
            grads.b_h[k] += da_h[k];
        }

        dx.fill(0.0);
        self.w_z.t_matvec_acc(&da_z, dx);
        self.w_r.t_matvec_acc(&da_r, dx);
        self.w_h.t_matvec_acc(&da_h, dx);
        self.u_z.t_matvec_acc(&da_z, dh_prev);
        self.u_r.t_matvec_acc(&da_r, dh_prev);
    }
}

impl ParamSet for GruParams {
    fn tensors(&self) -> Vec<&[f64]> {
        vec![
            self.w_z.as_slice(),
            self.w_r.as_slice(),
            self.w_h.as_slice(),
            self.u_z.as_slice(),
            self.u_r.as_slice(),
            self.u_h.as_slice(),
            &self.b_z,
            &self.b_r,
            &self.b_h,
        ]
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        vec![
            self.w_z.as_mut_slice(),
            self.w_r.as_mut_slice(),
            self.w_h.as_mut_slice(),
            self.u_z.as_mut_slice(),
            self.u_r.as_mut_slice(),
            self.u_h.as_mut_slice(),
            &mut self.b_z,
            &mut self.b_r,
            &mut self.b_h,
        ]
    }
}
