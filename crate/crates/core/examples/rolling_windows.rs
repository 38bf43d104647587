//! Cut the synthetic backtest into 10-day windows under both split policies
//! and show where the scaler puts the first few targets.

use blendcast::dataset::{fit_scaler, load_csv, make_windows, Split, SplitSpec, WindowAssignment};

fn main() -> blendcast::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/synthetic_backtest.csv");
    let data = load_csv(path)?;
    let split = SplitSpec::default();
    println!(
        "{} records ({} dropped for missing values)",
        data.records.len(),
        data.dropped_null
    );
    for (name, range) in split.named() {
        let days = data.records.iter().filter(|r| range.contains(r.date)).count();
        println!("  {name:?}: {} .. {} ({days} trading days)", range.start, range.end);
    }

    let train_only: Vec<_> = data
        .records
        .iter()
        .filter(|r| r.date <= split.train.end)
        .cloned()
        .collect();
    let scaler = fit_scaler(&train_only)?;
    println!("scaler fit on train: min {:.2}, max {:.2}", scaler.min, scaler.max);

    for mode in [WindowAssignment::ByTargetDate, WindowAssignment::WithinSplit] {
        let set = make_windows(&data.records, 10, &split, mode, &scaler)?;
        println!(
            "{mode:?}: train/validation/test = {:?}, unassigned {}",
            set.counts(),
            set.unassigned
        );
    }

    let set = make_windows(&data.records, 10, &split, WindowAssignment::ByTargetDate, &scaler)?;
    for w in set.get(Split::Test).iter().take(3) {
        println!(
            "  target {} close {:.2} scaled {:.4} (prev close {:.2}, inputs {}x{})",
            w.target_date,
            w.target_close,
            w.target,
            w.prev_actual_close,
            w.inputs.rows(),
            w.inputs.cols()
        );
    }
    Ok(())
}
