use chrono::{Datelike, NaiveDate};

use crate::error::{Error, Result};

/// Annualized mean and standard deviation, in percent per year.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnualizedStats {
    pub mean: f64,
    pub stdev: f64,
}

/// `mean = ppy * avg * 100`, `stdev = sqrt(ppy) * sample_sd * 100`.
pub fn annualized_stats(values: &[f64], periods_per_year: f64) -> Result<AnnualizedStats> {
    let n = values.len();
    if n < 2 {
        return Err(Error::SeriesTooShort { needed: 2, got: n });
    }
    let avg = values.iter().sum::<f64>() / n as f64;
    let var = if values.iter().all(|v| *v == values[0]) {
        0.0
    } else {
        values.iter().map(|v| (v - avg).powi(2)).sum::<f64>() / (n - 1) as f64
    };
    Ok(AnnualizedStats {
        mean: periods_per_year * avg * 100.0,
        stdev: (periods_per_year * var).sqrt() * 100.0,
    })
}

/// Sums `values` within each calendar month, in date order.
pub fn monthly_totals(dates: &[NaiveDate], values: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    let mut current = None;
    for (date, v) in dates.iter().zip(values) {
        let key = (date.year(), date.month());
        if current == Some(key) {
            *out.last_mut().expect("month started") += v;
        } else {
            out.push(*v);
            current = Some(key);
        }
    }
    out
}
