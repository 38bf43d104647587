//! Combine two imperfect level-0 forecasters three ways: a plain average, a
//! grid-searched weighted average and a small neural meta-learner.

use blendcast::ensemble::{
    average_predict, blend_fit, blend_predict, weighted_average_fit, weighted_average_predict, Level0Predictions,
    MetaConfig,
};
use blendcast::numerics::Rng;

fn mse(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len() as f64
}

/// One model that runs high and noisy, one that lags the truth.
fn level0(truth: &[f64], rng: &mut Rng) -> blendcast::Result<Level0Predictions> {
    let high: Vec<f64> = truth.iter().map(|t| t + 0.08 + 0.03 * rng.normal()).collect();
    let lagged: Vec<f64> = truth
        .iter()
        .enumerate()
        .map(|(i, t)| 0.7 * t + 0.3 * truth[i.saturating_sub(1)])
        .collect();
    Level0Predictions::from_columns(&[high, lagged], vec!["high".into(), "lagged".into()], Vec::new())
}

fn main() -> blendcast::Result<()> {
    let mut rng = Rng::new(7);
    let series: Vec<f64> = (0..60).map(|t| 0.5 + 0.3 * (t as f64 / 6.0).sin()).collect();
    let (val_truth, test_truth) = series.split_at(30);
    let (val, test) = (level0(val_truth, &mut rng)?, level0(test_truth, &mut rng)?);

    for (i, label) in test.labels().iter().enumerate() {
        println!("{label:>16}: test mse {:.5}", mse(&test.matrix().column(i), test_truth));
    }
    println!(
        "{:>16}: test mse {:.5}",
        "average",
        mse(&average_predict(&test), test_truth)
    );

    let weights = weighted_average_fit(&val, val_truth)?;
    let weighted = weighted_average_predict(&weights, &test)?;
    println!(
        "{:>16}: test mse {:.5}  weights {:?}",
        "weighted average",
        mse(&weighted, test_truth),
        weights.as_slice()
    );

    let meta = blend_fit(&val, val_truth, &MetaConfig::default())?;
    let blended = blend_predict(&meta, &test)?;
    println!("{:>16}: test mse {:.5}", "blending", mse(&blended, test_truth));
    Ok(())
}
