//! Point-in-time market data: per-security daily total returns and market
//! caps on a trading calendar, plus universe snapshots ranked by cap.

mod csv_io;
mod synthetic;
pub(crate) mod universe;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use chrono::{Datelike, NaiveDate};

use crate::error::{Error, Result};

pub use csv_io::{load_history, write_history, CSV_HEADER};
pub use synthetic::{generate_synthetic, SyntheticSpec};
pub use universe::{reconstitute, reconstitution_flows, Flows, UniverseSnapshot};

/// Opaque security identifier. Cheap to clone.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SecurityId(Arc<str>);

impl SecurityId {
    pub fn new(id: impl AsRef<str>) -> Self {
        Self(Arc::from(id.as_ref()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for SecurityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

impl fmt::Display for SecurityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for SecurityId {
    fn from(s: &str) -> Self {
        Self::new(s)
    }
}

/// One (date, security) observation.
#[derive(Debug, Clone, PartialEq)]
pub struct DailyRecord {
    pub date: NaiveDate,
    pub security: SecurityId,
    /// Simple total return over the day, 0.01 = +1%.
    pub total_return: f64,
    pub market_cap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quote {
    pub total_return: f64,
    pub market_cap: f64,
}

/// All quotes observed on one calendar date.
#[derive(Debug, Clone, PartialEq)]
pub struct TradingDay {
    pub date: NaiveDate,
    pub quotes: BTreeMap<SecurityId, Quote>,
}

impl TradingDay {
    pub fn total_cap(&self) -> f64 {
        self.quotes.values().map(|q| q.market_cap).sum()
    }
}

/// Immutable market history indexed by date, then security.
///
/// The calendar is the ordered set of dates carrying at least one record.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketHistory {
    days: Vec<TradingDay>,
}

impl MarketHistory {
    /// Builds a history from records in any order, validating every
    /// invariant. Errors number records from 1.
    pub fn from_records(records: Vec<DailyRecord>) -> Result<Self> {
        let lines = (1..=records.len() as u64).collect::<Vec<_>>();
        Self::from_numbered_records(records.into_iter().zip(lines))
    }

    pub(crate) fn from_numbered_records(
        records: impl IntoIterator<Item = (DailyRecord, u64)>,
    ) -> Result<Self> {
        let mut by_date: BTreeMap<NaiveDate, BTreeMap<SecurityId, Quote>> = BTreeMap::new();
        for (rec, line) in records {
            if !rec.total_return.is_finite() || !rec.market_cap.is_finite() {
                return Err(Error::MalformedRow {
                    line,
                    reason: "non-finite number".into(),
                });
            }
            if rec.market_cap <= 0.0 {
                return Err(Error::NonPositiveCap {
                    line,
                    cap: rec.market_cap,
                });
            }
            if rec.total_return <= -1.0 {
                return Err(Error::ReturnAtOrBelowMinusOne {
                    line,
                    ret: rec.total_return,
                });
            }
            let quotes = by_date.entry(rec.date).or_default();
            if quotes.contains_key(&rec.security) {
                return Err(Error::DuplicateRecord {
                    line,
                    date: rec.date,
                    security: rec.security.to_string(),
                });
            }
            quotes.insert(
                rec.security,
                Quote {
                    total_return: rec.total_return,
                    market_cap: rec.market_cap,
                },
            );
        }
        let days = by_date
            .into_iter()
            .map(|(date, quotes)| TradingDay { date, quotes })
            .collect();
        Ok(Self { days })
    }

    pub(crate) fn from_days(days: Vec<TradingDay>) -> Self {
        debug_assert!(days.windows(2).all(|w| w[0].date < w[1].date));
        Self { days }
    }

    pub fn is_empty(&self) -> bool {
        self.days.is_empty()
    }

    /// Number of trading days.
    pub fn len(&self) -> usize {
        self.days.len()
    }

    pub fn days(&self) -> &[TradingDay] {
        &self.days
    }

    pub fn day(&self, index: usize) -> &TradingDay {
        &self.days[index]
    }

    pub fn calendar(&self) -> Vec<NaiveDate> {
        self.days.iter().map(|d| d.date).collect()
    }

    pub fn index_of(&self, date: NaiveDate) -> Option<usize> {
        self.days.binary_search_by_key(&date, |d| d.date).ok()
    }

    pub fn quote(&self, index: usize, security: &SecurityId) -> Option<&Quote> {
        self.days[index].quotes.get(security)
    }

    pub fn records(&self) -> impl Iterator<Item = DailyRecord> + '_ {
        self.days.iter().flat_map(|day| {
            day.quotes.iter().map(move |(id, q)| DailyRecord {
                date: day.date,
                security: id.clone(),
                total_return: q.total_return,
                market_cap: q.market_cap,
            })
        })
    }

    /// Calendar indices of the first trading day of each month.
    pub fn reconstitution_indices(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut last: Option<(i32, u32)> = None;
        for (i, day) in self.days.iter().enumerate() {
            let ym = (day.date.year(), day.date.month());
            if last != Some(ym) {
                out.push(i);
                last = Some(ym);
            }
        }
        out
    }

    pub fn reconstitution_dates(&self) -> Vec<NaiveDate> {
        self.reconstitution_indices()
            .into_iter()
            .map(|i| self.days[i].date)
            .collect()
    }

    /// Restricts the history to `[start, end]` (both inclusive, either open).
    pub fn slice(&self, start: Option<NaiveDate>, end: Option<NaiveDate>) -> Self {
        let days = self
            .days
            .iter()
            .filter(|d| start.is_none_or(|s| d.date >= s) && end.is_none_or(|e| d.date <= e))
            .cloned()
            .collect();
        Self { days }
    }
}
