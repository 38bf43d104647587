#![allow(dead_code)]

pub mod gradcheck;
pub mod oracles;
pub mod tasks;

use blendcast::cells::ParamSet;
use blendcast::numerics::Rng;

/// Central-difference step.
pub const FD_STEP: f64 = 1e-6;

/// Gradients smaller than this are compared absolutely rather than relatively;
/// a central difference of a unit-scale loss carries roughly 1e-10 of
/// cancellation noise, so relative error is meaningless far below it.
pub const REL_FLOOR: f64 = 1e-3;

pub fn rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_FLOOR)
}

pub fn random_vec(rng: &mut Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| rng.uniform(-scale, scale)).collect()
}

pub fn randomize<P: ParamSet>(p: &mut P, rng: &mut Rng, scale: f64) {
    for t in p.tensors_mut() {
        t.iter_mut().for_each(|v| *v = rng.uniform(-scale, scale));
    }
}

pub fn flatten<P: ParamSet>(p: &P) -> Vec<f64> {
    p.tensors().concat()
}

/// Perturbs flat parameter `k` of `p` by `delta`.
pub fn nudge<P: ParamSet>(p: &mut P, k: usize, delta: f64) {
    let mut k = k;
    for t in p.tensors_mut() {
        if k < t.len() {
            t[k] += delta;
            return;
        }
        k -= t.len();
    }
    panic!("parameter index out of range");
}

/// Central difference of `f` around `p` with respect to every parameter.
pub fn fd_params<P: ParamSet + Clone>(p: &P, f: impl Fn(&P) -> f64) -> Vec<f64> {
    (0..p.num_params())
        .map(|k| {
            let mut a = p.clone();
            nudge(&mut a, k, FD_STEP);
            let mut b = p.clone();
            nudge(&mut b, k, -FD_STEP);
            (f(&a) - f(&b)) / (2.0 * FD_STEP)
        })
        .collect()
}

pub fn fd_vec(x: &[f64], f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    (0..x.len())
        .map(|k| {
            let mut a = x.to_vec();
            a[k] += FD_STEP;
            let mut b = x.to_vec();
            b[k] -= FD_STEP;
            (f(&a) - f(&b)) / (2.0 * FD_STEP)
        })
        .collect()
}

pub fn max_rel_err(analytic: &[f64], numeric: &[f64]) -> f64 {
    assert_eq!(analytic.len(), numeric.len());
    analytic
        .iter()
        .zip(numeric)
        .map(|(&a, &n)| rel_err(a, n))
        .fold(0.0, f64::max)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
