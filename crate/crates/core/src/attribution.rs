//! Trading-profit attribution by buy/sell lot matching.
//!
//! Each sell walks the security's buy lots newest-first and realizes
//! `m * (P_sell - P_buy) / P_buy` on every matched slice `m`. The walk halts
//! at the first reconstitution buy (a buy from zero prior weight); that lot
//! and everything older stay untouched. With a cost rate `tc`, each sell is
//! further charged `2 tc (matched + unmatched)`.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::market_data::SecurityId;
use crate::portfolio::TradeEvent;
use crate::series_csv::{read_columns, write_columns};

pub const PROFIT_HEADER: [&str; 2] = ["date", "trading_profit"];

#[derive(Debug, Clone, PartialEq)]
pub struct BuyLot {
    pub date: NaiveDate,
    pub original_weight: f64,
    pub remaining_weight: f64,
    pub price_index: f64,
    pub is_reconstitution_buy: bool,
}

/// Open buy lots per security, oldest first.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LotLedger {
    lots: BTreeMap<SecurityId, Vec<BuyLot>>,
}

/// Outcome of matching one sell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SellMatch {
    /// Realized profit before costs.
    pub gross_profit: f64,
    /// `gross_profit - 2 tc (matched + unmatched)`.
    pub profit: f64,
    pub matched: f64,
    pub unmatched: f64,
}

impl LotLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn lots(&self, security: &SecurityId) -> &[BuyLot] {
        self.lots.get(security).map_or(&[], Vec::as_slice)
    }

    pub fn securities(&self) -> impl Iterator<Item = &SecurityId> {
        self.lots.keys()
    }

    pub fn remaining_weight(&self, security: &SecurityId) -> f64 {
        self.lots(security).iter().map(|l| l.remaining_weight).sum()
    }

    /// Appends a lot as-is, without the pruning `record_buy` applies.
    pub fn push_lot(&mut self, security: SecurityId, lot: BuyLot) {
        self.lots.entry(security).or_default().push(lot);
    }

    /// Opens a lot for a buy.
    ///
    /// A reconstitution buy makes every older lot of the security
    /// unreachable for all future sells, so those lots are dropped here.
    pub fn record_buy(&mut self, event: &TradeEvent) -> Result<()> {
        if !(event.weight_change > 0.0) {
            return Err(Error::NonPositiveBuy(event.weight_change));
        }
        let lots = self.lots.entry(event.security.clone()).or_default();
        if event.is_reconstitution_buy {
            lots.clear();
        }
        lots.push(BuyLot {
            date: event.date,
            original_weight: event.weight_change,
            remaining_weight: event.weight_change,
            price_index: event.price_index,
            is_reconstitution_buy: event.is_reconstitution_buy,
        });
        Ok(())
    }

    /// Matches a sell against the security's lots, newest first.
    pub fn match_sell(&mut self, sell: &TradeEvent, tc_bps: f64) -> Result<SellMatch> {
        if !(sell.weight_change < 0.0) {
            return Err(Error::NonNegativeSell(sell.weight_change));
        }
        let lots = self
            .lots
            .get_mut(&sell.security)
            .ok_or_else(|| Error::SellWithoutBuy(sell.security.to_string()))?;
        let size = -sell.weight_change;
        let mut left = size;
        let mut gross = 0.0;
        for lot in lots.iter_mut().rev() {
            if left <= 0.0 || lot.is_reconstitution_buy {
                break;
            }
            let m = left.min(lot.remaining_weight);
            gross += m * (sell.price_index - lot.price_index) / lot.price_index;
            lot.remaining_weight -= m;
            left -= m;
        }
        lots.retain(|l| l.remaining_weight > 0.0 || l.is_reconstitution_buy);
        let matched = size - left;
        let unmatched = left;
        let tc = tc_bps / 10_000.0;
        Ok(SellMatch {
            gross_profit: gross,
            profit: gross - 2.0 * tc * (matched + unmatched),
            matched,
            unmatched,
        })
    }
}

/// Per-sell record kept by [`Attributor`].
#[derive(Debug, Clone, PartialEq)]
pub struct SellRecord {
    pub date: NaiveDate,
    pub security: SecurityId,
    pub result: SellMatch,
}

/// Streams trade events through one ledger.
#[derive(Debug, Clone)]
pub struct Attributor {
    tc_bps: f64,
    ledger: LotLedger,
    last_date: Option<NaiveDate>,
    profit_by_date: BTreeMap<NaiveDate, f64>,
    sells: Vec<SellRecord>,
}

impl Attributor {
    pub fn new(tc_bps: f64) -> Self {
        Self {
            tc_bps,
            ledger: LotLedger::new(),
            last_date: None,
            profit_by_date: BTreeMap::new(),
            sells: Vec::new(),
        }
    }

    pub fn ledger(&self) -> &LotLedger {
        &self.ledger
    }

    pub fn sells(&self) -> &[SellRecord] {
        &self.sells
    }

    pub fn process(&mut self, event: &TradeEvent) -> Result<Option<SellMatch>> {
        if let Some(previous) = self.last_date {
            if event.date < previous {
                return Err(Error::OutOfOrderTrades {
                    date: event.date,
                    previous,
                });
            }
        }
        self.last_date = Some(event.date);
        let day = self.profit_by_date.entry(event.date).or_insert(0.0);
        if event.weight_change > 0.0 {
            self.ledger.record_buy(event)?;
            return Ok(None);
        }
        let result = self.ledger.match_sell(event, self.tc_bps)?;
        *day += result.profit;
        self.sells.push(SellRecord {
            date: event.date,
            security: event.security.clone(),
            result,
        });
        Ok(Some(result))
    }

    /// Profit summed per trade date.
    pub fn into_series(self) -> ProfitSeries {
        let (dates, trading_profit) = self.profit_by_date.into_iter().unzip();
        ProfitSeries { dates, trading_profit }
    }
}

/// Realized trading profit per date.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfitSeries {
    pub dates: Vec<NaiveDate>,
    pub trading_profit: Vec<f64>,
}

impl ProfitSeries {
    /// Spreads the series onto `calendar`, zero on dates without trades.
    pub fn align(&self, calendar: &[NaiveDate]) -> Result<ProfitSeries> {
        let mut out = vec![0.0; calendar.len()];
        for (date, p) in self.dates.iter().zip(&self.trading_profit) {
            let i = calendar
                .binary_search(date)
                .map_err(|_| Error::Misaligned(format!("trade date {date} is not on the calendar")))?;
            out[i] += p;
        }
        Ok(ProfitSeries {
            dates: calendar.to_vec(),
            trading_profit: out,
        })
    }

    pub fn total(&self) -> f64 {
        self.trading_profit.iter().sum()
    }

    pub fn write_csv<W: Write>(&self, sink: W) -> Result<()> {
        write_columns(sink, &PROFIT_HEADER, &self.dates, &[&self.trading_profit])
    }

    pub fn read_csv<R: Read>(source: R) -> Result<Self> {
        let t = read_columns(source, &PROFIT_HEADER)?;
        Ok(Self {
            dates: t.dates,
            trading_profit: t.columns.into_iter().next().unwrap_or_default(),
        })
    }
}

/// Attributes a chronologically ordered trade list.
pub fn attribute(trades: &[TradeEvent], tc_bps: f64) -> Result<ProfitSeries> {
    let mut a = Attributor::new(tc_bps);
    for t in trades {
        a.process(t)?;
    }
    Ok(a.into_series())
}
