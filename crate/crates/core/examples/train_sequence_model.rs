//! Train a small stacked LSTM on a noiseless sine wave, save it, load it back
//! and check the reloaded model predicts identically.

use blendcast::dataset::WindowSample;
use blendcast::numerics::Matrix;
use blendcast::training::{build_model, load_model, predict, save_model, train, CellKind, ModelConfig, StoredModel};
use chrono::NaiveDate;

fn sine_windows(n: usize) -> blendcast::Result<Vec<WindowSample>> {
    let wave = |t: usize| 0.5 + 0.4 * (2.0 * std::f64::consts::PI * t as f64 / 20.0).sin();
    let date = NaiveDate::from_ymd_opt(2018, 1, 1).expect("valid date");
    (0..n)
        .map(|i| {
            Ok(WindowSample {
                inputs: Matrix::new(10, 1, (i..i + 10).map(wave).collect())?,
                target: wave(i + 10),
                target_date: date,
                prev_actual_close: wave(i + 9),
                target_close: wave(i + 10),
            })
        })
        .collect()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let samples = sine_windows(64)?;
    let cfg = ModelConfig {
        cell_kind: CellKind::Lstm,
        layers: 2,
        hidden: 16,
        dropout: 0.0,
        epochs: 200,
        ..ModelConfig::default()
    };
    let model = build_model(&cfg, 1)?;
    println!("{} parameters", model.num_params());

    let (model, trace) = train(model, &samples)?;
    for (epoch, loss) in trace.epoch_losses.iter().enumerate().step_by(40) {
        println!("epoch {epoch:>3}  loss {loss:.3e}");
    }
    println!("final loss {:.3e} in {:.1}s", trace.final_loss(), trace.wall_seconds);

    let dir = tempfile::tempdir()?;
    let path = dir.path().join("lstm.json");
    save_model(&StoredModel::Sequence(model.clone()), &path)?;
    let StoredModel::Sequence(reloaded) = load_model(&path)? else {
        unreachable!("saved a sequence model");
    };
    assert_eq!(predict(&model, &samples)?, predict(&reloaded, &samples)?);
    println!("reloaded from {} with identical predictions", path.display());
    Ok(())
}
