use std::io::{Read, Write};

use chrono::NaiveDate;

use super::{DailyRecord, MarketHistory, SecurityId};
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 4] = ["date", "security_id", "total_return", "market_cap"];

/// Parses a history from `date,security_id,total_return,market_cap` CSV.
pub fn load_history<R: Read>(source: R) -> Result<MarketHistory> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(source);

    let header = reader.headers()?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::MalformedRow {
            line: 1,
            reason: format!(
                "expected header `{}`, got `{}`",
                CSV_HEADER.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }

    let mut rows = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| Error::MalformedRow {
            line: e.position().map_or(0, |p| p.line()),
            reason: e.to_string(),
        })?;
        let line = row.position().map_or(0, |p| p.line());
        let malformed = |reason: String| Error::MalformedRow { line, reason };
        if row.len() != 4 {
            return Err(malformed(format!("expected 4 fields, got {}", row.len())));
        }
        let date = NaiveDate::parse_from_str(&row[0], "%Y-%m-%d")
            .map_err(|e| malformed(format!("bad date `{}`: {e}", &row[0])))?;
        if row[1].is_empty() {
            return Err(malformed("empty security_id".into()));
        }
        let total_return: f64 = row[2]
            .parse()
            .map_err(|e| malformed(format!("bad total_return `{}`: {e}", &row[2])))?;
        let market_cap: f64 = row[3]
            .parse()
            .map_err(|e| malformed(format!("bad market_cap `{}`: {e}", &row[3])))?;
        rows.push((
            DailyRecord {
                date,
                security: SecurityId::new(&row[1]),
                total_return,
                market_cap,
            },
            line,
        ));
    }
    MarketHistory::from_numbered_records(rows)
}

/// Writes a history in the same schema `load_history` reads, sorted by date
/// then security id. Floats use shortest round-trip formatting.
pub fn write_history<W: Write>(history: &MarketHistory, sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(CSV_HEADER)?;
    for rec in history.records() {
        w.write_record([
            rec.date.format("%Y-%m-%d").to_string(),
            rec.security.to_string(),
            rec.total_return.to_string(),
            rec.market_cap.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
