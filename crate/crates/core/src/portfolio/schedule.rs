use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Frequency {
    Monthly,
    Quarterly,
    Semiannual,
}

impl Frequency {
    pub fn cycle_months(self) -> u32 {
        match self {
            Frequency::Monthly => 1,
            Frequency::Quarterly => 3,
            Frequency::Semiannual => 6,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Frequency::Monthly => "monthly",
            Frequency::Quarterly => "quarterly",
            Frequency::Semiannual => "semiannual",
        }
    }
}

/// Which monthly reconstitution dates the equal-weighted portfolio trades on.
///
/// A month `m` (1 = January) is a rebalance month when
/// `m % cycle == month_offset`, so quarterly offset 2 trades in
/// Feb/May/Aug/Nov and semiannual offset 2 in Feb/Aug.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RebalanceSchedule {
    frequency: Frequency,
    month_offset: u32,
}

impl RebalanceSchedule {
    pub fn new(frequency: Frequency, month_offset: u32) -> Result<Self> {
        if month_offset >= frequency.cycle_months() {
            return Err(Error::InvalidSchedule(format!(
                "offset {month_offset} must be below the {}-month cycle",
                frequency.cycle_months()
            )));
        }
        Ok(Self {
            frequency,
            month_offset,
        })
    }

    pub fn monthly() -> Self {
        Self {
            frequency: Frequency::Monthly,
            month_offset: 0,
        }
    }

    pub fn frequency(&self) -> Frequency {
        self.frequency
    }

    pub fn month_offset(&self) -> u32 {
        self.month_offset
    }

    pub fn includes(&self, date: NaiveDate) -> bool {
        date.month() % self.frequency.cycle_months() == self.month_offset
    }
}

impl Default for RebalanceSchedule {
    fn default() -> Self {
        Self::monthly()
    }
}

impl fmt::Display for RebalanceSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.frequency {
            Frequency::Monthly => f.write_str("monthly"),
            other => write!(f, "{}:{}", other.name(), self.month_offset),
        }
    }
}

/// Parses `monthly`, `quarterly`, `quarterly:2`, `semiannual:2`, ...
impl FromStr for RebalanceSchedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, offset) = match s.split_once(':') {
            Some((n, o)) => (
                n.trim(),
                o.trim()
                    .parse::<u32>()
                    .map_err(|e| Error::InvalidSchedule(format!("bad offset in `{s}`: {e}")))?,
            ),
            None => (s.trim(), 0),
        };
        let frequency = match name {
            "monthly" => Frequency::Monthly,
            "quarterly" => Frequency::Quarterly,
            "semiannual" => Frequency::Semiannual,
            other => return Err(Error::InvalidSchedule(format!("unknown frequency `{other}`"))),
        };
        Self::new(frequency, offset)
    }
}
