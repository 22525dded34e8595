//! Multi-asset geometric Brownian motion market generator.
//!
//! Per-period log returns are i.i.d. in time and jointly normal across
//! assets with a single pairwise correlation, built from a one-factor
//! decomposition `x_i = m_i + s_i (sqrt(rho) z_0 + sqrt(1 - rho) z_i)`.
//! Caps start equal and compound with the emitted total returns.

use std::collections::BTreeMap;

use chrono::{Datelike, NaiveDate, Weekday};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{MarketHistory, Quote, SecurityId, TradingDay};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub n_assets: usize,
    pub horizon_years: f64,
    #[serde(default = "default_periods_per_year")]
    pub periods_per_year: u32,
    /// Annualized log-volatility: one value for all assets, or one per asset.
    #[serde(deserialize_with = "one_or_many")]
    pub vol: Vec<f64>,
    /// Annualized log-drift: one value for all assets, or one per asset.
    #[serde(default = "zero_drift", deserialize_with = "one_or_many")]
    pub drift: Vec<f64>,
    #[serde(default)]
    pub correlation: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_start")]
    pub start_date: NaiveDate,
    #[serde(default = "default_initial_cap")]
    pub initial_cap: f64,
}

fn one_or_many<'de, D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Vec<f64>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(f64),
        Many(Vec<f64>),
    }
    Ok(match OneOrMany::deserialize(de)? {
        OneOrMany::One(v) => vec![v],
        OneOrMany::Many(v) => v,
    })
}

fn default_periods_per_year() -> u32 {
    252
}

fn zero_drift() -> Vec<f64> {
    vec![0.0]
}

fn default_start() -> NaiveDate {
    NaiveDate::from_ymd_opt(1970, 1, 1).expect("valid date")
}

fn default_initial_cap() -> f64 {
    1.0e9
}

impl SyntheticSpec {
    /// Uncorrelated-by-default spec with the same vol and drift for every asset.
    pub fn uniform(n_assets: usize, horizon_years: f64, vol: f64, drift: f64, seed: u64) -> Self {
        Self {
            n_assets,
            horizon_years,
            periods_per_year: default_periods_per_year(),
            vol: vec![vol],
            drift: vec![drift],
            correlation: 0.0,
            seed,
            start_date: default_start(),
            initial_cap: default_initial_cap(),
        }
    }

    /// Number of return periods; the calendar has one more date (the base date).
    pub fn n_periods(&self) -> usize {
        (self.horizon_years * f64::from(self.periods_per_year)).round() as usize
    }

    fn per_asset(&self, values: &[f64], name: &str) -> Result<Vec<f64>> {
        match values.len() {
            1 => Ok(vec![values[0]; self.n_assets]),
            n if n == self.n_assets => Ok(values.to_vec()),
            n => Err(Error::InvalidSynthetic(format!(
                "{name} has {n} entries; expected 1 or n_assets = {}",
                self.n_assets
            ))),
        }
    }

    fn validate(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        if self.n_assets < 2 {
            return Err(Error::InvalidSynthetic("n_assets must be at least 2".into()));
        }
        if !(1..=365).contains(&self.periods_per_year) {
            return Err(Error::InvalidSynthetic("periods_per_year must lie in 1..=365".into()));
        }
        if !(self.horizon_years > 0.0) || self.n_periods() == 0 {
            return Err(Error::InvalidSynthetic("horizon must cover at least one period".into()));
        }
        if !(self.initial_cap > 0.0 && self.initial_cap.is_finite()) {
            return Err(Error::InvalidSynthetic("initial_cap must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.correlation) {
            return Err(Error::NonPsdCorrelation(self.correlation));
        }
        let vol = self.per_asset(&self.vol, "vol")?;
        let drift = self.per_asset(&self.drift, "drift")?;
        if vol.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(Error::InvalidSynthetic("vol must be finite and non-negative".into()));
        }
        if drift.iter().any(|d| !d.is_finite()) {
            return Err(Error::InvalidSynthetic("drift must be finite".into()));
        }
        Ok((vol, drift))
    }
}

/// Trading dates of one calendar year: `per_year` dates spread evenly over
/// its weekdays (over all days when there are fewer weekdays than that).
fn year_dates(year: i32, per_year: usize) -> Vec<NaiveDate> {
    let all: Vec<NaiveDate> = NaiveDate::from_ymd_opt(year, 1, 1)
        .expect("valid year")
        .iter_days()
        .take_while(|d| d.year() == year)
        .collect();
    let weekdays: Vec<NaiveDate> = all
        .iter()
        .copied()
        .filter(|d| !matches!(d.weekday(), Weekday::Sat | Weekday::Sun))
        .collect();
    let pool = if per_year <= weekdays.len() { weekdays } else { all };
    let n = pool.len();
    (0..per_year).map(|k| pool[k * n / per_year]).collect()
}

/// `len` trading dates from `start` on, `per_year` to a calendar year.
fn trading_calendar(start: NaiveDate, per_year: usize, len: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(len);
    let mut year = start.year();
    while out.len() < len {
        out.extend(
            year_dates(year, per_year)
                .into_iter()
                .filter(|d| *d >= start)
                .take(len - out.len()),
        );
        year += 1;
    }
    out
}

pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<MarketHistory> {
    let (vol, drift) = spec.validate()?;
    let n = spec.n_assets;
    let ppy = f64::from(spec.periods_per_year);
    let mean: Vec<f64> = drift.iter().map(|d| d / ppy).collect();
    let scale: Vec<f64> = vol.iter().map(|v| v / ppy.sqrt()).collect();
    let common = spec.correlation.sqrt();
    let idio = (1.0 - spec.correlation).sqrt();

    let width = n.to_string().len().max(4);
    let ids: Vec<SecurityId> = (1..=n)
        .map(|i| SecurityId::new(format!("S{i:0width$}")))
        .collect();

    let calendar = trading_calendar(spec.start_date, spec.periods_per_year as usize, spec.n_periods() + 1);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut caps = vec![spec.initial_cap; n];
    let mut shocks = vec![0.0f64; n];
    let mut days = Vec::with_capacity(calendar.len());

    for (t, &date) in calendar.iter().enumerate() {
        let mut quotes = BTreeMap::new();
        if t == 0 {
            for (id, &cap) in ids.iter().zip(&caps) {
                quotes.insert(id.clone(), Quote { total_return: 0.0, market_cap: cap });
            }
        } else {
            let z0: f64 = StandardNormal.sample(&mut rng);
            for s in shocks.iter_mut() {
                *s = StandardNormal.sample(&mut rng);
            }
            for i in 0..n {
                let log_ret = mean[i] + scale[i] * (common * z0 + idio * shocks[i]);
                let total_return = log_ret.exp_m1();
                caps[i] *= 1.0 + total_return;
                quotes.insert(
                    ids[i].clone(),
                    Quote {
                        total_return,
                        market_cap: caps[i],
                    },
                );
            }
        }
        days.push(TradingDay { date, quotes });
    }
    Ok(MarketHistory::from_days(days))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_vol_zero_drift_is_flat() {
        let h = generate_synthetic(&SyntheticSpec::uniform(5, 1.0, 0.0, 0.0, 3)).unwrap();
        assert_eq!(h.len(), 253);
        for day in h.days() {
            for q in day.quotes.values() {
                assert_eq!(q.total_return, 0.0);
                assert_eq!(q.market_cap, 1.0e9);
            }
        }
    }

    #[test]
    fn same_seed_same_history() {
        let spec = SyntheticSpec::uniform(10, 2.0, 0.3, 0.05, 42);
        assert_eq!(generate_synthetic(&spec).unwrap(), generate_synthetic(&spec).unwrap());
        let other = SyntheticSpec { seed: 43, ..spec.clone() };
        assert_ne!(generate_synthetic(&spec).unwrap(), generate_synthetic(&other).unwrap());
    }

    #[test]
    fn calendar_has_periods_per_year_weekdays_per_year() {
        let start = NaiveDate::from_ymd_opt(2001, 1, 1).unwrap();
        let cal = trading_calendar(start, 252, 252 * 3);
        assert!(cal.windows(2).all(|w| w[0] < w[1]));
        assert!(cal.iter().all(|d| !matches!(d.weekday(), Weekday::Sat | Weekday::Sun)));
        for y in 2001..=2003 {
            assert_eq!(cal.iter().filter(|d| d.year() == y).count(), 252);
        }
        // Every month carries trading days.
        let months: std::collections::BTreeSet<_> = cal.iter().map(|d| (d.year(), d.month())).collect();
        assert_eq!(months.len(), 36);
    }

    #[test]
    fn calendar_starts_mid_year() {
        let start = NaiveDate::from_ymd_opt(2021, 7, 1).unwrap();
        let cal = trading_calendar(start, 12, 30);
        assert!(cal[0] >= start);
        assert_eq!(cal.iter().filter(|d| d.year() == 2022).count(), 12);
        let cal = trading_calendar(start, 365, 3);
        assert_eq!(cal[0], start);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let ok = SyntheticSpec::uniform(3, 1.0, 0.2, 0.0, 0);
        assert!(matches!(
            generate_synthetic(&SyntheticSpec { correlation: 1.0, ..ok.clone() }),
            Err(Error::NonPsdCorrelation(_))
        ));
        assert!(matches!(
            generate_synthetic(&SyntheticSpec { correlation: -0.1, ..ok.clone() }),
            Err(Error::NonPsdCorrelation(_))
        ));
        assert!(generate_synthetic(&SyntheticSpec { n_assets: 1, ..ok.clone() }).is_err());
        assert!(generate_synthetic(&SyntheticSpec { vol: vec![-0.1], ..ok.clone() }).is_err());
        assert!(generate_synthetic(&SyntheticSpec { vol: vec![0.1, 0.2], ..ok.clone() }).is_err());
        assert!(generate_synthetic(&SyntheticSpec { drift: vec![0.0, 0.1, 0.2], ..ok }).is_ok());
    }
}
