use blendcast::dataset::WindowSample;
use blendcast::numerics::{Matrix, Rng};
use chrono::NaiveDate;

fn sample(inputs: Matrix, target: f64) -> WindowSample {
    WindowSample {
        inputs,
        target,
        target_date: NaiveDate::from_ymd_opt(2018, 1, 1).unwrap(),
        prev_actual_close: 1.0,
        target_close: 1.0,
    }
}

/// Next-value prediction on `0.5 + 0.4 sin(2πt/20)`, one feature, window 10.
pub fn sine_task(n: usize) -> Vec<WindowSample> {
    let s = |t: usize| 0.5 + 0.4 * (2.0 * std::f64::consts::PI * t as f64 / 20.0).sin();
    (0..n)
        .map(|i| sample(Matrix::new(10, 1, (i..i + 10).map(s).collect()).unwrap(), s(i + 10)))
        .collect()
}

/// Random five-feature windows that all map to 0.5.
pub fn constant_task(n: usize, seed: u64) -> Vec<WindowSample> {
    let mut rng = Rng::new(seed);
    (0..n)
        .map(|_| {
            let data = (0..50).map(|_| rng.uniform(-1.0, 1.0)).collect();
            sample(Matrix::new(10, 5, data).unwrap(), 0.5)
        })
        .collect()
}
