//! Seeded synthetic backtest data: a noisy trend-plus-cycle index with four
//! compound-score columns that lean toward the next day's move.
//!
//! The bundled fixture `tests/fixtures/synthetic_backtest.csv` is exactly
//! `generate(&SyntheticConfig::default())` written with
//! [`dataset::write_csv`](crate::dataset::write_csv).

use chrono::{Datelike, Duration, NaiveDate, Weekday};

use crate::dataset::TimeAlignedRecord;
use crate::numerics::Rng;

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticConfig {
    pub days: usize,
    pub last_date: NaiveDate,
    pub seed: u64,
    pub base: f64,
    pub drift: f64,
    pub cycle_amplitude: f64,
    pub cycle_period: f64,
    /// AR(1) coefficient and innovation scale of the price noise.
    pub ar: f64,
    pub noise: f64,
    /// Weight of the next-day move in each compound, and the per-source noise.
    pub signal: f64,
    pub compound_noise: f64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            days: 150,
            last_date: NaiveDate::from_ymd_opt(2018, 6, 1).expect("valid date"),
            seed: 20180601,
            base: 2650.0,
            drift: 0.45,
            cycle_amplitude: 40.0,
            cycle_period: 23.0,
            ar: 0.6,
            noise: 6.0,
            signal: 0.6,
            compound_noise: 0.25,
        }
    }
}

/// The `n` weekdays ending at `last` (inclusive), oldest first.
pub fn weekdays_ending(last: NaiveDate, n: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(n);
    let mut d = last;
    while out.len() < n {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d -= Duration::days(1);
    }
    out.reverse();
    out
}

fn round_to(x: f64, decimals: i32) -> f64 {
    let k = 10f64.powi(decimals);
    (x * k).round() / k
}

pub fn generate(cfg: &SyntheticConfig) -> Vec<TimeAlignedRecord> {
    let mut rng = Rng::new(cfg.seed);
    let dates = weekdays_ending(cfg.last_date, cfg.days);
    let mut ar = 0.0;
    let prices: Vec<f64> = (0..cfg.days)
        .map(|t| {
            ar = cfg.ar * ar + cfg.noise * rng.normal();
            let t = t as f64;
            let cycle = cfg.cycle_amplitude * (2.0 * std::f64::consts::PI * t / cfg.cycle_period).sin();
            round_to(cfg.base + cfg.drift * t + cycle + ar, 2)
        })
        .collect();
    (0..cfg.days)
        .map(|t| {
            let next_move = if t + 1 < cfg.days {
                prices[t + 1] - prices[t]
            } else {
                0.0
            };
            let lean = cfg.signal * (next_move / 15.0).tanh();
            let mut c = [0.0; 4];
            for v in c.iter_mut() {
                *v = round_to((lean + cfg.compound_noise * rng.normal()).clamp(-1.0, 1.0), 4);
            }
            TimeAlignedRecord {
                date: dates[t],
                wsj: c[0],
                reuters: c[1],
                cnbc: c[2],
                fortune: c[3],
                adj_close: prices[t],
            }
        })
        .collect()
}
