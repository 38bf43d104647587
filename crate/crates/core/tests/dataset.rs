use blendcast::dataset::{
    fit_scaler, make_windows, read_csv, write_csv, DateRange, ScalerParams, SplitSpec, TimeAlignedRecord,
    WindowAssignment,
};
use blendcast::synthetic::{generate, weekdays_ending, SyntheticConfig};
use chrono::NaiveDate;
use proptest::prelude::*;

fn ymd(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).unwrap()
}

fn flat_records(dates: &[NaiveDate]) -> Vec<TimeAlignedRecord> {
    dates
        .iter()
        .enumerate()
        .map(|(i, &date)| TimeAlignedRecord {
            date,
            wsj: 0.1,
            reuters: 0.0,
            cnbc: -0.1,
            fortune: 0.2,
            adj_close: 2600.0 + i as f64,
        })
        .collect()
}

#[test]
fn nineteen_day_split_gives_nine_samples() {
    // 19 trading days per split, as in the default validation range
    let dates = weekdays_ending(ymd(2018, 6, 1), 19 * 3);
    let recs = flat_records(&dates);
    let split = SplitSpec {
        train: DateRange::new(dates[0], dates[18]),
        validation: DateRange::new(dates[19], dates[37]),
        test: DateRange::new(dates[38], dates[56]),
    };
    let sc = fit_scaler(&recs).unwrap();
    let set = make_windows(&recs, 10, &split, WindowAssignment::WithinSplit, &sc).unwrap();
    assert_eq!(set.counts(), (9, 9, 9));
}

#[test]
fn default_validation_range_has_nineteen_trading_days() {
    let dates = weekdays_ending(ymd(2018, 6, 1), 150);
    let s = SplitSpec::default();
    assert_eq!(dates.iter().filter(|d| s.validation.contains(**d)).count(), 19);
}

#[test]
fn null_rows_are_dropped_and_counted() {
    let csv = "date,wsj,reuters,cnbc,fortune,adj_close\n\
               2018-04-10,0.1,0.2,0.3,0.4,2656.87\n\
               2018-04-11,null,0.2,0.3,0.4,2642.19\n\
               2018-04-12,0.1,0.2,0.3,0.4,2663.99\n";
    let d = read_csv(csv.as_bytes(), "mem").unwrap();
    assert_eq!(d.records.len(), 2);
    assert_eq!(d.dropped_null, 1);
}

#[test]
fn bundled_fixture_is_reproducible() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/synthetic_backtest.csv");
    let on_disk = std::fs::read(path).unwrap();
    let mut regenerated = Vec::new();
    write_csv(&generate(&SyntheticConfig::default()), &mut regenerated).unwrap();
    assert_eq!(on_disk, regenerated);
    let d = read_csv(on_disk.as_slice(), "fixture").unwrap();
    assert_eq!((d.records.len(), d.dropped_null), (150, 0));
}

#[test]
fn by_target_date_windows_on_fixture() {
    let recs = generate(&SyntheticConfig::default());
    let sc = fit_scaler(&recs).unwrap();
    let set = make_windows(&recs, 10, &SplitSpec::default(), WindowAssignment::ByTargetDate, &sc).unwrap();
    assert_eq!(set.counts(), (88, 19, 20));
    assert_eq!(set.unassigned + 88 + 19 + 20, 150 - 10);
    // windows assigned by target date may reach back into the previous split
    assert!(
        set.validation[0].inputs.get(9, 4)
            == sc.scale(recs.iter().find(|r| r.date == ymd(2018, 4, 9)).unwrap().adj_close)
    );
}

proptest! {
    #[test]
    fn scaler_round_trips(prices in prop::collection::vec(1.0f64..5000.0, 2..50), x in 1.0f64..5000.0) {
        prop_assume!(prices.iter().any(|p| *p != prices[0]));
        let s = ScalerParams::fit(&prices).unwrap();
        prop_assert!((s.unscale(s.scale(x)) - x).abs() <= 1e-9 * x);
        for p in &prices {
            let v = s.scale(*p);
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&v));
        }
    }

    #[test]
    fn window_count_is_length_minus_window(n in 12usize..60, window in 1usize..11) {
        let dates = weekdays_ending(ymd(2018, 6, 1), n);
        let recs = flat_records(&dates);
        let split = SplitSpec {
            train: DateRange::new(dates[0], dates[n - 1]),
            validation: DateRange::new(ymd(2019, 1, 1), ymd(2019, 1, 2)),
            test: DateRange::new(ymd(2020, 1, 1), ymd(2020, 1, 2)),
        };
        let sc = fit_scaler(&recs).unwrap();
        let set = make_windows(&recs, window, &split, WindowAssignment::ByTargetDate, &sc).unwrap();
        prop_assert_eq!(set.train.len(), n - window);
        for s in &set.train {
            prop_assert_eq!(s.inputs.shape(), (window, 5));
        }
    }
}
