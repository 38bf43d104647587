//! Deliberately naive second implementations, written straight from the
//! equations with explicit loops, used as oracles.

#![allow(clippy::needless_range_loop)]

use blendcast::cells::{GruParams, LstmParams};

fn sig(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// One LSTM step on the concatenation `[h, x]`.
pub fn lstm_step(p: &LstmParams, x: &[f64], h: &[f64], c: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let hidden = h.len();
    let z: Vec<f64> = h.iter().chain(x.iter()).copied().collect();
    let mut h_new = vec![0.0; hidden];
    let mut c_new = vec![0.0; hidden];
    for k in 0..hidden {
        let mut af = p.b_f[k];
        let mut ai = p.b_i[k];
        let mut ac = p.b_c[k];
        let mut ao = p.b_o[k];
        for j in 0..z.len() {
            af += p.w_f.get(k, j) * z[j];
            ai += p.w_i.get(k, j) * z[j];
            ac += p.w_c.get(k, j) * z[j];
            ao += p.w_o.get(k, j) * z[j];
        }
        c_new[k] = sig(af) * c[k] + sig(ai) * ac.tanh();
        h_new[k] = sig(ao) * c_new[k].tanh();
    }
    (h_new, c_new)
}

pub fn gru_step(p: &GruParams, x: &[f64], h: &[f64]) -> Vec<f64> {
    let hidden = h.len();
    let lin = |w: &blendcast::numerics::Matrix, v: &[f64], k: usize| -> f64 {
        (0..v.len()).map(|j| w.get(k, j) * v[j]).sum()
    };
    let mut r = vec![0.0; hidden];
    for k in 0..hidden {
        r[k] = sig(lin(&p.w_r, x, k) + lin(&p.u_r, h, k) + p.b_r[k]);
    }
    let rh: Vec<f64> = (0..hidden).map(|k| r[k] * h[k]).collect();
    (0..hidden)
        .map(|k| {
            let z = sig(lin(&p.w_z, x, k) + lin(&p.u_z, h, k) + p.b_z[k]);
            let cand = (lin(&p.w_h, x, k) + lin(&p.u_h, &rh, k) + p.b_h[k]).tanh();
            (1.0 - z) * h[k] + z * cand
        })
        .collect()
}

#[derive(Debug)]
pub struct BruteEval {
    pub mse: f64,
    pub mpa: f64,
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub mda: f64,
}

pub fn brute_eval(actual: &[f64], predicted: &[f64], prev: &[f64]) -> BruteEval {
    let n = actual.len();
    let mut sq = 0.0;
    let mut rel = 0.0;
    let (mut tp, mut fp, mut fn_, mut tn, mut same) = (0, 0, 0, 0, 0);
    for i in 0..n {
        sq += (actual[i] - predicted[i]).powi(2);
        rel += (actual[i] - predicted[i]).abs() / actual[i];
        let up_actual = actual[i] > prev[i];
        let up_pred = predicted[i] > prev[i];
        if up_actual == up_pred {
            same += 1;
        }
        if up_actual && up_pred {
            tp += 1;
        } else if !up_actual && up_pred {
            fp += 1;
        } else if up_actual && !up_pred {
            fn_ += 1;
        } else {
            tn += 1;
        }
    }
    let precision = if tp + fp == 0 {
        0.0
    } else {
        tp as f64 / (tp + fp) as f64
    };
    let recall = if tp + fn_ == 0 {
        0.0
    } else {
        tp as f64 / (tp + fn_) as f64
    };
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    BruteEval {
        mse: sq / n as f64,
        mpa: 1.0 - rel / n as f64,
        tp,
        fp,
        fn_,
        tn,
        precision,
        recall,
        f1,
        mda: same as f64 / n as f64,
    }
}

/// Returns the first mismatching field, if any.
pub fn compare_eval(r: &blendcast::metrics::EvalReport, b: &BruteEval, tol: f64) -> Option<String> {
    let c = &r.confusion;
    if (c.tp, c.fp, c.fn_, c.tn) != (b.tp, b.fp, b.fn_, b.tn) {
        return Some(format!("confusion {c:?} vs {b:?}"));
    }
    for (name, x, y) in [
        ("mse", r.mse, b.mse),
        ("mpa", r.mpa, b.mpa),
        ("precision", r.precision, b.precision),
        ("recall", r.recall, b.recall),
        ("f1", r.f1, b.f1),
        ("mda", r.mda, b.mda),
    ] {
        if (x - y).abs() > tol * y.abs().max(1.0) {
            return Some(format!("{name}: {x} vs {y}"));
        }
    }
    None
}
