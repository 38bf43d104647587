//! Finite-difference checks shared by the property tests and the acceptance run.
//! Each returns the worst relative error over every parameter and input.

use blendcast::cells::{Activation, DenseParams, GruParams, LstmParams, LstmState, LstmStateGrad};
use blendcast::dataset::WindowSample;
use blendcast::numerics::{Matrix, Rng};
use blendcast::training::{CellKind, ModelConfig, SequenceModel};
use chrono::NaiveDate;

use super::{dot, fd_params, fd_vec, flatten, max_rel_err, random_vec, randomize};

/// Loss `a·h' + b·c'` for random projections `a`, `b`.
pub fn lstm_case(input: usize, hidden: usize, seed: u64) -> f64 {
    let mut rng = Rng::new(seed);
    let mut p = LstmParams::zeros(input, hidden);
    randomize(&mut p, &mut rng, 1.0);
    let x = random_vec(&mut rng, input, 1.0);
    let h0 = random_vec(&mut rng, hidden, 1.0);
    let c0 = random_vec(&mut rng, hidden, 1.0);
    let a = random_vec(&mut rng, hidden, 1.0);
    let b = random_vec(&mut rng, hidden, 1.0);

    let loss = |p: &LstmParams, x: &[f64], h: &[f64], c: &[f64]| {
        let (s, _) = p
            .forward(
                x,
                &LstmState {
                    h: h.to_vec(),
                    c: c.to_vec(),
                },
            )
            .unwrap();
        dot(&a, &s.h) + dot(&b, &s.c)
    };
    let (_, cache) = p
        .forward(
            &x,
            &LstmState {
                h: h0.clone(),
                c: c0.clone(),
            },
        )
        .unwrap();
    let back = p
        .backward(
            &cache,
            &LstmStateGrad {
                dh: a.clone(),
                dc: b.clone(),
            },
        )
        .unwrap();

    let e_params = max_rel_err(&flatten(&back.params), &fd_params(&p, |q| loss(q, &x, &h0, &c0)));
    let e_x = max_rel_err(&back.dx, &fd_vec(&x, |v| loss(&p, v, &h0, &c0)));
    let e_h = max_rel_err(&back.dprev.dh, &fd_vec(&h0, |v| loss(&p, &x, v, &c0)));
    let e_c = max_rel_err(&back.dprev.dc, &fd_vec(&c0, |v| loss(&p, &x, &h0, v)));
    e_params.max(e_x).max(e_h).max(e_c)
}

pub fn gru_case(input: usize, hidden: usize, seed: u64) -> f64 {
    let mut rng = Rng::new(seed);
    let mut p = GruParams::zeros(input, hidden);
    randomize(&mut p, &mut rng, 1.0);
    let x = random_vec(&mut rng, input, 1.0);
    let h0 = random_vec(&mut rng, hidden, 1.0);
    let a = random_vec(&mut rng, hidden, 1.0);

    let loss = |p: &GruParams, x: &[f64], h: &[f64]| dot(&a, &p.forward(x, h).unwrap().0);
    let (_, cache) = p.forward(&x, &h0).unwrap();
    let back = p.backward(&cache, &a).unwrap();

    let e_params = max_rel_err(&flatten(&back.params), &fd_params(&p, |q| loss(q, &x, &h0)));
    let e_x = max_rel_err(&back.dx, &fd_vec(&x, |v| loss(&p, v, &h0)));
    let e_h = max_rel_err(&back.dh_prev, &fd_vec(&h0, |v| loss(&p, &x, v)));
    e_params.max(e_x).max(e_h)
}

pub const ACTIVATIONS: [Activation; 4] = [
    Activation::Identity,
    Activation::Relu,
    Activation::Sigmoid,
    Activation::Tanh,
];

pub fn dense_case(input: usize, output: usize, activation: Activation, seed: u64) -> f64 {
    let mut rng = Rng::new(seed);
    let mut p = DenseParams::zeros(input, output, activation);
    randomize(&mut p, &mut rng, 1.0);
    let x = random_vec(&mut rng, input, 1.0);
    let a = random_vec(&mut rng, output, 1.0);

    let loss = |p: &DenseParams, x: &[f64]| dot(&a, &p.forward(x).unwrap().0);
    let (_, cache) = p.forward(&x).unwrap();
    let back = p.backward(&cache, &a).unwrap();

    let e_params = max_rel_err(&flatten(&back.params), &fd_params(&p, |q| loss(q, &x)));
    let e_x = max_rel_err(&back.dx, &fd_vec(&x, |v| loss(&p, v)));
    e_params.max(e_x)
}

pub fn random_samples(rng: &mut Rng, n: usize, steps: usize, features: usize) -> Vec<WindowSample> {
    (0..n)
        .map(|_| WindowSample {
            inputs: Matrix::new(steps, features, random_vec(rng, steps * features, 1.0)).unwrap(),
            target: rng.uniform(0.0, 1.0),
            target_date: NaiveDate::from_ymd_opt(2018, 1, 1).unwrap(),
            prev_actual_close: 1.0,
            target_close: 1.0,
        })
        .collect()
}

/// Whole-model gradient of the MSE loss: 2 layers, 3 time steps, dropout off.
pub fn stacked_case(kind: CellKind, seed: u64) -> f64 {
    let mut rng = Rng::new(seed);
    let cfg = ModelConfig {
        cell_kind: kind,
        layers: 2,
        hidden: 4,
        dropout: 0.0,
        seed,
        ..ModelConfig::default()
    };
    let mut model = SequenceModel::new(&cfg, 3).unwrap();
    let mut flat = model.flat_params();
    flat.iter_mut().for_each(|v| *v = rng.uniform(-0.8, 0.8));
    model.set_flat_params(&flat).unwrap();
    let samples = random_samples(&mut rng, 4, 3, 3);

    let (_, analytic) = model.loss_and_gradient(&samples).unwrap();
    let numeric = fd_vec(&flat, |v| {
        let mut m = model.clone();
        m.set_flat_params(v).unwrap();
        m.loss(&samples).unwrap()
    });
    max_rel_err(&analytic, &numeric)
}
