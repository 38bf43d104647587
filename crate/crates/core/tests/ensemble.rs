use blendcast::ensemble::{
    average_predict, blend_fit, blend_predict, weighted_average_fit, weighted_average_predict, Level0Predictions,
    MetaConfig, WeightVector,
};
use blendcast::numerics::Rng;
use proptest::prelude::*;

fn targets(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = Rng::new(seed);
    (0..n).map(|_| rng.uniform(0.0, 1.0)).collect()
}

fn mse(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len() as f64
}

#[test]
fn learns_to_average_offset_columns() {
    let t = targets(50, 1);
    let cols = [
        t.iter().map(|v| v + 1.0).collect(),
        t.iter().map(|v| v - 1.0).collect::<Vec<_>>(),
    ];
    let l0 = Level0Predictions::unlabeled(&cols).unwrap();
    let meta = blend_fit(&l0, &t, &MetaConfig::default()).unwrap();
    let pred = blend_predict(&meta, &l0).unwrap();
    assert!(mse(&pred, &t) < 0.05, "mse {}", mse(&pred, &t));
}

#[test]
fn picks_out_a_perfect_column() {
    let t = targets(50, 2);
    let mut rng = Rng::new(3);
    let noise: Vec<f64> = (0..50).map(|_| rng.uniform(0.0, 1.0)).collect();
    let l0 = Level0Predictions::unlabeled(&[t.clone(), noise]).unwrap();
    let meta = blend_fit(&l0, &t, &MetaConfig::default()).unwrap();
    let pred = blend_predict(&meta, &l0).unwrap();
    assert!(mse(&pred, &t) < 1e-4, "mse {}", mse(&pred, &t));
}

#[test]
fn weight_search_recovers_a_grid_point() {
    let mut rng = Rng::new(4);
    let a: Vec<f64> = (0..30).map(|_| rng.uniform(0.0, 1.0)).collect();
    let b: Vec<f64> = (0..30).map(|_| rng.uniform(0.0, 1.0)).collect();
    let t: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 0.3 * x + 0.7 * y).collect();
    let l0 = Level0Predictions::unlabeled(&[a, b]).unwrap();
    let w = weighted_average_fit(&l0, &t).unwrap();
    assert!((w.as_slice()[0] - 0.3).abs() < 1e-12 && (w.as_slice()[1] - 0.7).abs() < 1e-12);
}

#[test]
fn blending_is_deterministic_per_seed() {
    let t = targets(20, 5);
    let cols = [
        t.iter().map(|v| v * 0.9).collect(),
        t.iter().map(|v| v + 0.1).collect::<Vec<_>>(),
    ];
    let l0 = Level0Predictions::unlabeled(&cols).unwrap();
    let cfg = MetaConfig {
        epochs: 50,
        seed: 9,
        ..MetaConfig::default()
    };
    assert_eq!(blend_fit(&l0, &t, &cfg).unwrap(), blend_fit(&l0, &t, &cfg).unwrap());
}

proptest! {
    #[test]
    fn average_lies_within_row_range(rows in prop::collection::vec(prop::collection::vec(-10.0f64..10.0, 3), 1..20)) {
        let cols: Vec<Vec<f64>> = (0..3).map(|j| rows.iter().map(|r| r[j]).collect()).collect();
        let l0 = Level0Predictions::unlabeled(&cols).unwrap();
        for (i, v) in average_predict(&l0).into_iter().enumerate() {
            let lo = rows[i].iter().copied().fold(f64::INFINITY, f64::min);
            let hi = rows[i].iter().copied().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
        }
    }

    #[test]
    fn one_hot_weights_select_a_column(rows in prop::collection::vec(prop::collection::vec(-10.0f64..10.0, 2), 1..20), pick in 0usize..2) {
        let cols: Vec<Vec<f64>> = (0..2).map(|j| rows.iter().map(|r| r[j]).collect()).collect();
        let l0 = Level0Predictions::unlabeled(&cols).unwrap();
        let mut w = vec![0.0; 2];
        w[pick] = 1.0;
        let out = weighted_average_predict(&WeightVector::new(w).unwrap(), &l0).unwrap();
        prop_assert_eq!(out, cols[pick].clone());
    }
}
