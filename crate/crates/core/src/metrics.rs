//! Price-error and direction metrics.
//!
//! MSE and MPA are computed on unscaled prices. Directions compare each value
//! against the previous day's *actual* close, with ties counted as "not up";
//! the up-move is the positive class of the confusion matrix.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check_lengths(op: &'static str, a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::shape(op, format!("lengths {a} and {b} differ")));
    }
    Ok(())
}

fn check_nonempty(op: &'static str, n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument(format!("{op} of an empty series")));
    }
    Ok(())
}

pub fn mse(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    check_lengths("mse", actual.len(), predicted.len())?;
    check_nonempty("mse", actual.len())?;
    let sum: f64 = actual.iter().zip(predicted).map(|(y, p)| (y - p) * (y - p)).sum();
    Ok(sum / actual.len() as f64)
}

/// Mean prediction accuracy, `1 - mean(|y - ŷ| / y)`.
pub fn mpa(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    check_lengths("mpa", actual.len(), predicted.len())?;
    check_nonempty("mpa", actual.len())?;
    if let Some(i) = actual.iter().position(|&y| y.is_nan() || y <= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "mpa needs positive actual prices, got {} at index {i}",
            actual[i]
        )));
    }
    let rel: f64 = actual.iter().zip(predicted).map(|(y, p)| (y - p).abs() / y).sum();
    Ok(1.0 - rel / actual.len() as f64)
}

/// `1` where `values[i] > prev_actuals[i]`, else `0`.
pub fn directions(prev_actuals: &[f64], values: &[f64]) -> Result<Vec<u8>> {
    check_lengths("directions", prev_actuals.len(), values.len())?;
    Ok(prev_actuals.iter().zip(values).map(|(p, v)| u8::from(v > p)).collect())
}

fn check_binary(op: &'static str, dirs: &[u8]) -> Result<()> {
    if let Some(i) = dirs.iter().position(|&d| d > 1) {
        return Err(Error::InvalidArgument(format!(
            "{op}: direction {} at index {i} is not 0 or 1",
            dirs[i]
        )));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

pub fn confusion(actual_dirs: &[u8], predicted_dirs: &[u8]) -> Result<ConfusionCounts> {
    check_lengths("confusion", actual_dirs.len(), predicted_dirs.len())?;
    check_binary("confusion", actual_dirs)?;
    check_binary("confusion", predicted_dirs)?;
    let mut c = ConfusionCounts::default();
    for (&a, &p) in actual_dirs.iter().zip(predicted_dirs) {
        match (a, p) {
            (1, 1) => c.tp += 1,
            (0, 1) => c.fp += 1,
            (1, 0) => c.fn_ += 1,
            _ => c.tn += 1,
        }
    }
    Ok(c)
}

/// A ratio metric. `degenerate` is set when its denominator was zero, in
/// which case `value` is reported as 0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ratio {
    pub value: f64,
    pub degenerate: bool,
}

impl Ratio {
    fn of(num: u64, den: u64) -> Ratio {
        if den == 0 {
            Ratio {
                value: 0.0,
                degenerate: true,
            }
        } else {
            Ratio {
                value: num as f64 / den as f64,
                degenerate: false,
            }
        }
    }
}

pub fn precision(c: &ConfusionCounts) -> Ratio {
    Ratio::of(c.tp, c.tp + c.fp)
}

pub fn recall(c: &ConfusionCounts) -> Ratio {
    Ratio::of(c.tp, c.tp + c.fn_)
}

pub fn f1(c: &ConfusionCounts) -> Ratio {
    let p = precision(c).value;
    let r = recall(c).value;
    if p + r == 0.0 {
        Ratio {
            value: 0.0,
            degenerate: true,
        }
    } else {
        Ratio {
            value: 2.0 * p * r / (p + r),
            degenerate: false,
        }
    }
}

/// Fraction of positions where the two direction series agree.
pub fn mda(actual_dirs: &[u8], predicted_dirs: &[u8]) -> Result<f64> {
    check_lengths("mda", actual_dirs.len(), predicted_dirs.len())?;
    check_nonempty("mda", actual_dirs.len())?;
    let hits = actual_dirs.iter().zip(predicted_dirs).filter(|(a, p)| a == p).count();
    Ok(hits as f64 / actual_dirs.len() as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n: usize,
    pub mse: f64,
    pub mpa: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub mda: f64,
    pub confusion: ConfusionCounts,
    pub precision_degenerate: bool,
    pub recall_degenerate: bool,
    pub f1_degenerate: bool,
}

pub fn evaluate(actual: &[f64], predicted: &[f64], prev_actuals: &[f64]) -> Result<EvalReport> {
    check_lengths("evaluate", actual.len(), predicted.len())?;
    check_lengths("evaluate", actual.len(), prev_actuals.len())?;
    let actual_dirs = directions(prev_actuals, actual)?;
    let predicted_dirs = directions(prev_actuals, predicted)?;
    let c = confusion(&actual_dirs, &predicted_dirs)?;
    let (p, r, f) = (precision(&c), recall(&c), f1(&c));
    Ok(EvalReport {
        n: actual.len(),
        mse: mse(actual, predicted)?,
        mpa: mpa(actual, predicted)?,
        precision: p.value,
        recall: r.value,
        f1: f.value,
        mda: mda(&actual_dirs, &predicted_dirs)?,
        confusion: c,
        precision_degenerate: p.degenerate,
        recall_degenerate: r.degenerate,
        f1_degenerate: f.degenerate,
    })
}

/// One column of the comparison table. `External` columns hold numbers
/// reported elsewhere (for example a published baseline) and may omit metrics.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ExternalColumn {
    pub name: String,
    #[serde(default)]
    pub mse: Option<f64>,
    #[serde(default)]
    pub mpa: Option<f64>,
    #[serde(default)]
    pub precision: Option<f64>,
    #[serde(default)]
    pub recall: Option<f64>,
    #[serde(default)]
    pub f1: Option<f64>,
    #[serde(default)]
    pub mda: Option<f64>,
}

impl From<(&str, &EvalReport)> for ExternalColumn {
    fn from((name, r): (&str, &EvalReport)) -> Self {
        ExternalColumn {
            name: name.to_string(),
            mse: Some(r.mse),
            mpa: Some(r.mpa),
            precision: Some(r.precision),
            recall: Some(r.recall),
            f1: Some(r.f1),
            mda: Some(r.mda),
        }
    }
}

pub const TABLE_ROWS: [&str; 6] = ["MSE", "MPA", "Precision", "Recall", "F1-Score", "MDA"];

/// Renders metrics as rows and models as columns, right-aligned. MSE is
/// printed with two decimals; the ratio metrics as percentages.
pub fn format_table(columns: &[ExternalColumn]) -> String {
    let cell = |v: Option<f64>, pct: bool| match v {
        None => "-".to_string(),
        Some(x) if pct => format!("{:.2}%", 100.0 * x),
        Some(x) => format!("{x:.2}"),
    };
    let mut grid: Vec<Vec<String>> = vec![std::iter::once("Metric".to_string())
        .chain(columns.iter().map(|c| c.name.clone()))
        .collect()];
    for (k, label) in TABLE_ROWS.iter().enumerate() {
        let mut row = vec![label.to_string()];
        for c in columns {
            let v = [c.mse, c.mpa, c.precision, c.recall, c.f1, c.mda][k];
            row.push(cell(v, k > 0));
        }
        grid.push(row);
    }
    let ncols = grid[0].len();
    let widths: Vec<usize> = (0..ncols)
        .map(|j| grid.iter().map(|r| r[j].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in &grid {
        let mut line = String::new();
        for (j, s) in row.iter().enumerate() {
            if j == 0 {
                let _ = write!(line, "{s:<w$}", w = widths[0]);
            } else {
                let _ = write!(line, "  {s:>w$}", w = widths[j]);
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}
