use std::io::{Read, Write};

use chrono::NaiveDate;

use super::TradeEvent;
use crate::error::{Error, Result};
use crate::market_data::SecurityId;

pub const TRADES_HEADER: [&str; 5] = [
    "date",
    "security_id",
    "weight_change",
    "price_index",
    "is_reconstitution_buy",
];

pub fn write_trades<W: Write>(trades: &[TradeEvent], sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(TRADES_HEADER)?;
    for t in trades {
        w.write_record([
            t.date.format("%Y-%m-%d").to_string(),
            t.security.to_string(),
            t.weight_change.to_string(),
            t.price_index.to_string(),
            t.is_reconstitution_buy.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a trade log, e.g. one produced outside this engine.
pub fn read_trades<R: Read>(source: R) -> Result<Vec<TradeEvent>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
    let header = reader.headers()?.clone();
    if header.iter().ne(TRADES_HEADER) {
        return Err(Error::MalformedRow {
            line: 1,
            reason: format!("expected header `{}`", TRADES_HEADER.join(",")),
        });
    }
    let mut out = Vec::new();
    for row in reader.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let bad = |what: &str, value: &str| Error::MalformedRow {
            line,
            reason: format!("bad {what} `{value}`"),
        };
        if row.len() != TRADES_HEADER.len() {
            return Err(bad("field count", &row.len().to_string()));
        }
        let date = NaiveDate::parse_from_str(&row[0], "%Y-%m-%d").map_err(|_| bad("date", &row[0]))?;
        if row[1].is_empty() {
            return Err(bad("security_id", ""));
        }
        let weight_change: f64 = row[2].parse().map_err(|_| bad("weight_change", &row[2]))?;
        let price_index: f64 = row[3].parse().map_err(|_| bad("price_index", &row[3]))?;
        if !(price_index > 0.0 && price_index.is_finite()) {
            return Err(bad("price_index", &row[3]));
        }
        if !weight_change.is_finite() || weight_change.abs() > 1.0 {
            return Err(bad("weight_change", &row[2]));
        }
        let is_reconstitution_buy = match &row[4] {
            "true" | "1" => true,
            "false" | "0" => false,
            other => return Err(bad("is_reconstitution_buy", other)),
        };
        out.push(TradeEvent {
            date,
            security: SecurityId::new(&row[1]),
            weight_change,
            price_index,
            is_reconstitution_buy,
        });
    }
    Ok(out)
}
