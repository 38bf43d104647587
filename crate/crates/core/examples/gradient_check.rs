//! Compare the hand-derived LSTM and GRU cell gradients against central
//! finite differences for a random cell and the loss `sum(h')`.

use blendcast::cells::{GruParams, LstmParams, LstmState, LstmStateGrad, ParamSet};
use blendcast::numerics::Rng;

const STEP: f64 = 1e-6;

fn numeric_grad<P: ParamSet + Clone>(params: &P, loss: impl Fn(&P) -> f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(params.num_params());
    let (mut t, mut k) = (0, 0);
    while out.len() < params.num_params() {
        let bump = |delta: f64| {
            let mut p = params.clone();
            p.tensors_mut()[t][k] += delta;
            loss(&p)
        };
        out.push((bump(STEP) - bump(-STEP)) / (2.0 * STEP));
        k += 1;
        if k == params.tensors()[t].len() {
            t += 1;
            k = 0;
        }
    }
    out
}

fn worst_relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    analytic
        .iter()
        .zip(numeric)
        .map(|(a, n)| (a - n).abs() / a.abs().max(n.abs()).max(1e-3))
        .fold(0.0, f64::max)
}

fn main() -> blendcast::Result<()> {
    let (input, hidden) = (3, 4);
    let mut rng = Rng::new(2018);
    let x: Vec<f64> = (0..input).map(|_| rng.uniform(-1.0, 1.0)).collect();

    let lstm = LstmParams::init(&mut rng, input, hidden);
    let prev = LstmState {
        h: vec![0.1; hidden],
        c: vec![-0.2; hidden],
    };
    let (_, cache) = lstm.forward(&x, &prev)?;
    let upstream = LstmStateGrad {
        dh: vec![1.0; hidden],
        dc: vec![0.0; hidden],
    };
    let analytic = lstm.backward(&cache, &upstream)?.params.tensors().concat();
    let numeric = numeric_grad(&lstm, |p| p.forward(&x, &prev).unwrap().0.h.iter().sum());
    println!(
        "LSTM {} params: worst relative error {:.2e}",
        analytic.len(),
        worst_relative_error(&analytic, &numeric)
    );

    let gru = GruParams::init(&mut rng, input, hidden);
    let h_prev = vec![0.3; hidden];
    let (_, cache) = gru.forward(&x, &h_prev)?;
    let analytic = gru.backward(&cache, &vec![1.0; hidden])?.params.tensors().concat();
    let numeric = numeric_grad(&gru, |p| p.forward(&x, &h_prev).unwrap().0.iter().sum());
    println!(
        "GRU  {} params: worst relative error {:.2e}",
        analytic.len(),
        worst_relative_error(&analytic, &numeric)
    );
    Ok(())
}
