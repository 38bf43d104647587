//! Run the whole pipeline on the synthetic backtest and write every output
//! file into a scratch directory.
//!
//! The default config trains 4x50 stacks for 100 epochs, which takes a while
//! on one core; pass `quick` to shrink the level-0 models.

use blendcast::experiment::{run_experiment, DataSource, ExperimentConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/synthetic_backtest.csv");
    let mut cfg = ExperimentConfig::new(DataSource::Dataset { path: path.into() });
    if std::env::args().any(|a| a == "quick") {
        for m in [&mut cfg.lstm, &mut cfg.gru] {
            m.layers = 2;
            m.hidden = 16;
            m.epochs = 40;
        }
    }
    let dir = tempfile::tempdir()?;
    cfg.output_dir = dir.path().join("out");

    let report = run_experiment(&cfg)?;
    println!(
        "samples: train {} / validation {} / test {}",
        report.samples.train, report.samples.validation, report.samples.test
    );
    for t in &report.training {
        println!(
            "{:>5}: loss {:.3e} -> {:.3e} over {} epochs",
            t.name, t.first_loss, t.final_loss, t.epochs
        );
    }
    if let Some(w) = &report.weights {
        println!("weighted-average weights: {w:?}");
    }
    print!("\n{}", report.table());

    let mut files: Vec<_> = std::fs::read_dir(&cfg.output_dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.file_name())
        .collect();
    files.sort();
    println!("\nwrote {files:?}");
    Ok(())
}
