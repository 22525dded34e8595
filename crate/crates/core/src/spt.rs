//! Size exposure, calibrated leakage and rebalancing-premium estimate for an
//! equal-weighted top-n portfolio.
//!
//! Per period, with `bracket` the log return of the equal-weighted top-n
//! portfolio minus that of the cap-weighted top-n portfolio:
//!
//! ```text
//! leakage = factor * (bracket - size_exposure)
//! premium = bracket - size_exposure - leakage
//! ```
//!
//! so `premium + leakage == bracket - size_exposure` holds by construction.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::market_data::SecurityId;
use crate::portfolio::{SimulationRun, WeightMap};
use crate::series_csv::{read_columns, write_columns};

pub const DECOMPOSITION_HEADER: [&str; 4] = ["date", "size_exposure", "leakage", "premium_estimate"];

/// Leakage calibration factors by (universe, size label).
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationTable {
    factors: BTreeMap<(String, String), f64>,
}

impl CalibrationTable {
    pub fn empty() -> Self {
        Self {
            factors: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, universe: &str, size: &str, factor: f64) -> Result<()> {
        check_factor(factor)?;
        self.factors.insert((universe.to_owned(), size.to_owned()), factor);
        Ok(())
    }

    pub fn get(&self, universe: &str, size: &str) -> Option<f64> {
        self.factors.get(&(universe.to_owned(), size.to_owned())).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str, f64)> {
        self.factors.iter().map(|((u, s), f)| (u.as_str(), s.as_str(), *f))
    }
}

impl Default for CalibrationTable {
    /// Factors for the crsp, s500, msci and msem universes.
    fn default() -> Self {
        let mut t = Self::empty();
        for (universe, lrg, sml) in [
            ("crsp", 0.3, 0.3),
            ("s500", 0.45, 0.55),
            ("msci", 0.45, 0.55),
            ("msem", 0.6, 0.65),
        ] {
            t.insert(universe, "lrg", lrg).expect("valid factor");
            t.insert(universe, "sml", sml).expect("valid factor");
        }
        t
    }
}

pub fn check_factor(factor: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&factor) {
        Ok(factor)
    } else {
        Err(Error::InvalidCalibration(factor))
    }
}

/// Change in the average log market weight of the names held at both ends
/// of the period.
///
/// `held_start` and `held_end` are the portfolio's holdings; only names with
/// positive weight in both count. `mu_start` / `mu_end` give each name's
/// share of total universe cap.
pub fn size_exposure(
    held_start: &WeightMap,
    held_end: &WeightMap,
    mu_start: impl Fn(&SecurityId) -> Option<f64>,
    mu_end: impl Fn(&SecurityId) -> Option<f64>,
) -> Result<f64> {
    let mut count = 0usize;
    let mut sum = 0.0;
    for (id, &w) in held_start {
        if w <= 0.0 || held_end.get(id).is_none_or(|&v| v <= 0.0) {
            continue;
        }
        let start = mu_start(id).filter(|m| *m > 0.0);
        let end = mu_end(id).filter(|m| *m > 0.0);
        match (start, end) {
            (Some(s), Some(e)) => {
                sum += (e / s).ln();
                count += 1;
            }
            _ => return Err(Error::MissingMarketWeight(id.to_string())),
        }
    }
    if count == 0 {
        return Err(Error::EmptySnapshot);
    }
    Ok(sum / count as f64)
}

pub fn leakage(ew_topn_ret: f64, cw_topn_ret: f64, size_exp: f64, factor: f64) -> f64 {
    factor * ((ew_topn_ret - cw_topn_ret) - size_exp)
}

pub fn premium_estimate(ew_topn_ret: f64, cw_topn_ret: f64, size_exp: f64, factor: f64) -> f64 {
    (1.0 - factor) * ((ew_topn_ret - cw_topn_ret) - size_exp)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionSeries {
    pub dates: Vec<NaiveDate>,
    pub size_exposure: Vec<f64>,
    pub leakage: Vec<f64>,
    pub premium_estimate: Vec<f64>,
}

impl DecompositionSeries {
    pub fn write_csv<W: Write>(&self, sink: W) -> Result<()> {
        write_columns(
            sink,
            &DECOMPOSITION_HEADER,
            &self.dates,
            &[&self.size_exposure, &self.leakage, &self.premium_estimate],
        )
    }

    pub fn read_csv<R: Read>(source: R) -> Result<Self> {
        let t = read_columns(source, &DECOMPOSITION_HEADER)?;
        let mut cols = t.columns.into_iter();
        Ok(Self {
            dates: t.dates,
            size_exposure: cols.next().unwrap_or_default(),
            leakage: cols.next().unwrap_or_default(),
            premium_estimate: cols.next().unwrap_or_default(),
        })
    }
}

/// Splits a series of per-period top-n brackets into size, leakage and
/// premium parts.
pub fn decompose_series(
    dates: &[NaiveDate],
    bracket: &[f64],
    size: &[f64],
    factor: f64,
) -> Result<DecompositionSeries> {
    check_factor(factor)?;
    if bracket.len() != dates.len() || size.len() != dates.len() {
        return Err(Error::Misaligned(format!(
            "{} dates, {} bracket values, {} size values",
            dates.len(),
            bracket.len(),
            size.len()
        )));
    }
    let mut leak = Vec::with_capacity(dates.len());
    let mut prem = Vec::with_capacity(dates.len());
    for (&b, &s) in bracket.iter().zip(size) {
        let l = leakage(b, 0.0, s, factor);
        leak.push(l);
        prem.push(b - s - l);
    }
    Ok(DecompositionSeries {
        dates: dates.to_vec(),
        size_exposure: size.to_vec(),
        leakage: leak,
        premium_estimate: prem,
    })
}

pub fn decompose(run: &SimulationRun, factor: f64) -> Result<DecompositionSeries> {
    decompose_series(&run.dates, &run.ew_vs_cw_topn, &run.size_exposure, factor)
}
