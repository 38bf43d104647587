//! Six-column daily dataset: ingestion, price scaling, date splits and
//! rolling-window sample construction.
//!
//! Input schema (header required):
//!
//! ```text
//! date,wsj,reuters,cnbc,fortune,adj_close
//! 2018-04-10,0.4404,-0.1027,,0.25,2656.87
//! ```
//!
//! Empty fields (or `null`/`nan`/`na`) mark missing data; such rows are
//! dropped and counted. Dates are ISO-8601 (`YYYY-MM-DD`) or `MM/DD/YYYY`,
//! detected from the first row and required to be consistent across the file.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Matrix;

pub const SOURCES: [&str; 4] = ["wsj", "reuters", "cnbc", "fortune"];
pub const HEADER: [&str; 6] = ["date", "wsj", "reuters", "cnbc", "fortune", "adj_close"];
pub const FEATURE_COUNT: usize = 5;
pub const DEFAULT_WINDOW: usize = 10;

/// One trading day: four headline compound scores and the adjusted close.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeAlignedRecord {
    pub date: NaiveDate,
    pub wsj: f64,
    pub reuters: f64,
    pub cnbc: f64,
    pub fortune: f64,
    pub adj_close: f64,
}

impl TimeAlignedRecord {
    pub fn compounds(&self) -> [f64; 4] {
        [self.wsj, self.reuters, self.cnbc, self.fortune]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LoadedDataset {
    pub records: Vec<TimeAlignedRecord>,
    /// Rows dropped because a field was missing.
    pub dropped_null: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum DateFormat {
    Iso,
    UsSlash,
}

impl DateFormat {
    pub(crate) fn detect(s: &str) -> Option<Self> {
        let s = s.trim();
        if NaiveDate::parse_from_str(s, "%Y-%m-%d").is_ok() {
            Some(DateFormat::Iso)
        } else if NaiveDate::parse_from_str(s, "%m/%d/%Y").is_ok() {
            Some(DateFormat::UsSlash)
        } else {
            None
        }
    }

    pub(crate) fn parse(self, s: &str) -> Option<NaiveDate> {
        let fmt = match self {
            DateFormat::Iso => "%Y-%m-%d",
            DateFormat::UsSlash => "%m/%d/%Y",
        };
        NaiveDate::parse_from_str(s.trim(), fmt).ok()
    }
}

pub(crate) fn is_missing(field: &str) -> bool {
    let f = field.trim();
    f.is_empty() || ["null", "nan", "na"].iter().any(|m| f.eq_ignore_ascii_case(m))
}

/// Lenient date parser used where no file-level format applies (CLI flags, config).
pub fn parse_date(s: &str) -> Result<NaiveDate> {
    DateFormat::detect(s)
        .and_then(|f| f.parse(s))
        .ok_or_else(|| Error::InvalidArgument(format!("unrecognised date `{s}`")))
}

pub fn load_csv(path: impl AsRef<Path>) -> Result<LoadedDataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, &path.display().to_string())
}

/// Parses the six-column schema from any reader; `origin` names the source in errors.
pub fn read_csv<R: Read>(reader: R, origin: &str) -> Result<LoadedDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let header = rdr.headers()?.clone();
    let names: Vec<String> = header.iter().map(|h| h.trim().to_ascii_lowercase()).collect();
    if names != HEADER {
        return Err(Error::Data {
            path: origin.to_string(),
            message: format!(
                "header must be `{}`, found `{}`",
                HEADER.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }

    let parse_err = |line: u64, message: String| Error::Parse {
        path: origin.to_string(),
        line,
        message,
    };

    let mut records = Vec::new();
    let mut dropped_null = 0;
    let mut format: Option<DateFormat> = None;
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        if row.len() != HEADER.len() {
            return Err(parse_err(
                line,
                format!("expected {} fields, found {}", HEADER.len(), row.len()),
            ));
        }
        if row.iter().any(is_missing) {
            dropped_null += 1;
            continue;
        }
        let date_field = &row[0];
        let fmt = match format {
            Some(f) => f,
            None => {
                let f = DateFormat::detect(date_field)
                    .ok_or_else(|| parse_err(line, format!("unrecognised date `{date_field}`")))?;
                format = Some(f);
                f
            }
        };
        let date = fmt.parse(date_field).ok_or_else(|| {
            parse_err(
                line,
                format!("date `{date_field}` does not match the file's {fmt:?} date format"),
            )
        })?;

        let mut values = [0.0; 5];
        for (k, v) in values.iter_mut().enumerate() {
            let raw = row[k + 1].trim();
            *v = raw
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| parse_err(line, format!("column `{}`: not a number: `{raw}`", HEADER[k + 1])))?;
        }
        for (k, &c) in values[..4].iter().enumerate() {
            if !(-1.0..=1.0).contains(&c) {
                return Err(parse_err(
                    line,
                    format!("column `{}`: compound {c} outside [-1, 1]", SOURCES[k]),
                ));
            }
        }
        if values[4] <= 0.0 {
            return Err(parse_err(
                line,
                format!("column `adj_close`: price must be positive, got {}", values[4]),
            ));
        }
        records.push(TimeAlignedRecord {
            date,
            wsj: values[0],
            reuters: values[1],
            cnbc: values[2],
            fortune: values[3],
            adj_close: values[4],
        });
    }

    if dropped_null > 0 {
        log::info!("{origin}: dropped {dropped_null} row(s) with missing fields");
    }
    if records.is_empty() {
        return Err(Error::Data {
            path: origin.to_string(),
            message: "no complete rows".into(),
        });
    }
    records.sort_by_key(|r| r.date);
    if let Some(w) = records.windows(2).find(|w| w[0].date == w[1].date) {
        return Err(Error::Data {
            path: origin.to_string(),
            message: format!("duplicate date {}", w[0].date),
        });
    }
    Ok(LoadedDataset { records, dropped_null })
}

/// Writes records in the six-column schema (ISO dates).
pub fn write_csv<W: Write>(records: &[TimeAlignedRecord], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(HEADER)?;
    for r in records {
        w.write_record([
            r.date.to_string(),
            r.wsj.to_string(),
            r.reuters.to_string(),
            r.cnbc.to_string(),
            r.fortune.to_string(),
            r.adj_close.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

/// Min-max price scaler.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalerParams {
    pub min: f64,
    pub max: f64,
}

impl ScalerParams {
    pub fn fit(prices: &[f64]) -> Result<Self> {
        let min = prices.iter().copied().fold(f64::INFINITY, f64::min);
        let max = prices.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !(min.is_finite() && max.is_finite()) || max <= min {
            return Err(Error::InvalidArgument(
                "scaler needs at least two distinct finite prices".into(),
            ));
        }
        Ok(ScalerParams { min, max })
    }

    #[inline]
    pub fn scale(&self, price: f64) -> f64 {
        (price - self.min) / (self.max - self.min)
    }

    #[inline]
    pub fn unscale(&self, scaled: f64) -> f64 {
        scaled * (self.max - self.min) + self.min
    }
}

pub fn fit_scaler(records: &[TimeAlignedRecord]) -> Result<ScalerParams> {
    let prices: Vec<f64> = records.iter().map(|r| r.adj_close).collect();
    ScalerParams::fit(&prices)
}

/// Inclusive calendar range.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DateRange {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl DateRange {
    pub fn new(start: NaiveDate, end: NaiveDate) -> Self {
        DateRange { start, end }
    }

    pub fn contains(&self, d: NaiveDate) -> bool {
        self.start <= d && d <= self.end
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train: DateRange,
    pub validation: DateRange,
    pub test: DateRange,
}

fn ymd(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).expect("valid calendar date")
}

impl Default for SplitSpec {
    /// 2017-12-07..2018-04-09 / 2018-04-10..2018-05-04 / 2018-05-07..2018-06-01.
    fn default() -> Self {
        SplitSpec {
            train: DateRange::new(ymd(2017, 12, 7), ymd(2018, 4, 9)),
            validation: DateRange::new(ymd(2018, 4, 10), ymd(2018, 5, 4)),
            test: DateRange::new(ymd(2018, 5, 7), ymd(2018, 6, 1)),
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, r) in self.named() {
            if r.start > r.end {
                return Err(Error::config("split", format!("{name} range ends before it starts")));
            }
        }
        if self.train.end >= self.validation.start || self.validation.end >= self.test.start {
            return Err(Error::config(
                "split",
                "ranges must be ordered train < validation < test without overlap",
            ));
        }
        Ok(())
    }

    pub fn named(&self) -> [(Split, DateRange); 3] {
        [
            (Split::Train, self.train),
            (Split::Validation, self.validation),
            (Split::Test, self.test),
        ]
    }

    pub fn locate(&self, d: NaiveDate) -> Option<Split> {
        self.named().into_iter().find(|(_, r)| r.contains(d)).map(|(s, _)| s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Validation,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Validation, Split::Test];
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Validation => "validation",
            Split::Test => "test",
        })
    }
}

/// How rolling windows are assigned to splits.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowAssignment {
    /// Windows run over the whole series; a sample belongs to the split that
    /// contains its target date, so its inputs may reach into the previous split.
    #[default]
    ByTargetDate,
    /// Windows never cross a split boundary.
    WithinSplit,
}

impl std::str::FromStr for WindowAssignment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "by_target_date" => Ok(WindowAssignment::ByTargetDate),
            "within_split" => Ok(WindowAssignment::WithinSplit),
            other => Err(Error::InvalidArgument(format!(
                "unknown split mode `{other}` (expected by_target_date or within_split)"
            ))),
        }
    }
}

/// `window × 5` input block (oldest day first; columns wsj, reuters, cnbc,
/// fortune, scaled close) and the scaled next-day close it should predict.
#[derive(Clone, Debug, PartialEq)]
pub struct WindowSample {
    pub inputs: Matrix,
    pub target: f64,
    pub target_date: NaiveDate,
    /// Unscaled close of the last input day.
    pub prev_actual_close: f64,
    /// Unscaled close on the target date.
    pub target_close: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct WindowSet {
    pub train: Vec<WindowSample>,
    pub validation: Vec<WindowSample>,
    pub test: Vec<WindowSample>,
    /// Samples whose target date fell in no split (by_target_date only).
    pub unassigned: usize,
}

impl WindowSet {
    pub fn get(&self, split: Split) -> &[WindowSample] {
        match split {
            Split::Train => &self.train,
            Split::Validation => &self.validation,
            Split::Test => &self.test,
        }
    }

    fn get_mut(&mut self, split: Split) -> &mut Vec<WindowSample> {
        match split {
            Split::Train => &mut self.train,
            Split::Validation => &mut self.validation,
            Split::Test => &mut self.test,
        }
    }

    pub fn counts(&self) -> (usize, usize, usize) {
        (self.train.len(), self.validation.len(), self.test.len())
    }
}

fn window_sample(days: &[TimeAlignedRecord], target: &TimeAlignedRecord, scaler: &ScalerParams) -> WindowSample {
    let mut data = Vec::with_capacity(days.len() * FEATURE_COUNT);
    for d in days {
        data.extend_from_slice(&d.compounds());
        data.push(scaler.scale(d.adj_close));
    }
    WindowSample {
        inputs: Matrix::new(days.len(), FEATURE_COUNT, data).expect("window dims"),
        target: scaler.scale(target.adj_close),
        target_date: target.date,
        prev_actual_close: days.last().expect("window >= 1").adj_close,
        target_close: target.adj_close,
    }
}

/// Cuts `records` (sorted by date) into rolling-window samples.
pub fn make_windows(
    records: &[TimeAlignedRecord],
    window: usize,
    split: &SplitSpec,
    assignment: WindowAssignment,
    scaler: &ScalerParams,
) -> Result<WindowSet> {
    if window == 0 {
        return Err(Error::config("window", "must be at least 1"));
    }
    split.validate()?;
    let mut set = WindowSet::default();
    match assignment {
        WindowAssignment::ByTargetDate => {
            for t in window..records.len() {
                let sample = window_sample(&records[t - window..t], &records[t], scaler);
                match split.locate(records[t].date) {
                    Some(s) => set.get_mut(s).push(sample),
                    None => set.unassigned += 1,
                }
            }
        }
        WindowAssignment::WithinSplit => {
            for (name, range) in split.named() {
                let days: Vec<TimeAlignedRecord> = records.iter().filter(|r| range.contains(r.date)).cloned().collect();
                if days.len() < window + 1 {
                    return Err(Error::InvalidArgument(format!(
                        "{name} split has {} day(s); window {window} needs at least {}",
                        days.len(),
                        window + 1
                    )));
                }
                let out = set.get_mut(name);
                for t in window..days.len() {
                    out.push(window_sample(&days[t - window..t], &days[t], scaler));
                }
            }
        }
    }
    let (a, b, c) = set.counts();
    log::info!(
        "windows: train {a}, validation {b}, test {c}, unassigned {}",
        set.unassigned
    );
    Ok(set)
}

/// Debug dump: one row per (sample, day).
pub fn write_window_dump<W: Write>(set: &WindowSet, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "split",
        "sample",
        "target_date",
        "step",
        "wsj",
        "reuters",
        "cnbc",
        "fortune",
        "scaled_close",
        "target",
    ])?;
    for split in Split::ALL {
        for (i, s) in set.get(split).iter().enumerate() {
            for step in 0..s.inputs.rows() {
                let mut row = vec![
                    split.to_string(),
                    i.to_string(),
                    s.target_date.to_string(),
                    step.to_string(),
                ];
                row.extend(s.inputs.row(step).iter().map(f64::to_string));
                row.push(s.target.to_string());
                w.write_record(&row)?;
            }
        }
    }
    w.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}
