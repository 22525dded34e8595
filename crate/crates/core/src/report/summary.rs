use std::fmt::{self, Write as _};
use std::io::Read;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum SeriesLabel {
    EwRelativeReturn,
    PremiumEstimate,
    TradingProfit,
    Turnover,
}

impl SeriesLabel {
    pub const ALL: [SeriesLabel; 4] = [
        SeriesLabel::EwRelativeReturn,
        SeriesLabel::PremiumEstimate,
        SeriesLabel::TradingProfit,
        SeriesLabel::Turnover,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SeriesLabel::EwRelativeReturn => "ew_relative_return",
            SeriesLabel::PremiumEstimate => "premium_estimate",
            SeriesLabel::TradingProfit => "trading_profit",
            SeriesLabel::Turnover => "turnover",
        }
    }
}

impl fmt::Display for SeriesLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SeriesLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SeriesLabel::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| Error::MalformedRow {
                line: 0,
                reason: format!("unknown series label `{s}`"),
            })
    }
}

/// One line of a summary table, in percent per year.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    /// Grid cell the row belongs to; may be empty.
    pub cell: String,
    pub series: SeriesLabel,
    pub mean: f64,
    pub stdev: f64,
    /// Mean minus the baseline cell's mean, for non-baseline cells.
    pub change: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Plain,
    Csv,
}

pub const SUMMARY_HEADER: [&str; 5] = ["cell", "series", "mean", "stdev", "change"];

/// Renders rows. Plain output groups rows by cell, prints two decimals and
/// drops the change column from blocks where no row has one; CSV keeps
/// full precision.
pub fn emit_summary(rows: &[SummaryRow], format: Format) -> Vec<u8> {
    match format {
        Format::Csv => emit_csv(rows),
        Format::Plain => emit_plain(rows).into_bytes(),
    }
}

fn emit_csv(rows: &[SummaryRow]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SUMMARY_HEADER).expect("write to memory");
    for r in rows {
        w.write_record([
            r.cell.clone(),
            r.series.to_string(),
            r.mean.to_string(),
            r.stdev.to_string(),
            r.change.map(|c| c.to_string()).unwrap_or_default(),
        ])
        .expect("write to memory");
    }
    w.into_inner().expect("flush to memory")
}

fn emit_plain(rows: &[SummaryRow]) -> String {
    let mut out = String::new();
    let mut start = 0;
    while start < rows.len() {
        let cell = &rows[start].cell;
        let end = start + rows[start..].iter().take_while(|r| &r.cell == cell).count();
        let block = &rows[start..end];
        if !out.is_empty() {
            out.push('\n');
        }
        if !cell.is_empty() {
            let _ = writeln!(out, "{cell}");
        }
        let with_change = block.iter().any(|r| r.change.is_some());
        let _ = write!(out, "{:<20} {:>8} {:>8}", "series", "mean", "stdev");
        if with_change {
            let _ = write!(out, " {:>8}", "change");
        }
        out.push('\n');
        for r in block {
            let _ = write!(out, "{:<20} {:>8.2} {:>8.2}", r.series.as_str(), r.mean, r.stdev);
            if with_change {
                match r.change {
                    Some(c) => {
                        let _ = write!(out, " {c:>8.2}");
                    }
                    None => {
                        let _ = write!(out, " {:>8}", "");
                    }
                }
            }
            out.push('\n');
        }
        start = end;
    }
    out
}

/// Parses the CSV summary format.
pub fn parse_summary<R: Read>(source: R) -> Result<Vec<SummaryRow>> {
    let mut reader = csv::Reader::from_reader(source);
    if reader.headers()?.iter().ne(SUMMARY_HEADER) {
        return Err(Error::MalformedRow {
            line: 1,
            reason: format!("expected header `{}`", SUMMARY_HEADER.join(",")),
        });
    }
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let bad = |reason: String| Error::MalformedRow { line, reason };
        if rec.len() != SUMMARY_HEADER.len() {
            return Err(bad("wrong field count".into()));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|e| bad(format!("bad number `{s}`: {e}")));
        rows.push(SummaryRow {
            cell: rec[0].to_owned(),
            series: rec[1].parse().map_err(|_| bad(format!("unknown series `{}`", &rec[1])))?,
            mean: num(&rec[2])?,
            stdev: num(&rec[3])?,
            change: if rec[4].is_empty() { None } else { Some(num(&rec[4])?) },
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(series: SeriesLabel, mean: f64, stdev: f64, change: Option<f64>) -> SummaryRow {
        SummaryRow {
            cell: String::new(),
            series,
            mean,
            stdev,
            change,
        }
    }

    #[test]
    fn plain_single_row_without_change() {
        let out = emit_summary(&[row(SeriesLabel::EwRelativeReturn, 0.74, 4.66, None)], Format::Plain);
        let text = String::from_utf8(out).unwrap();
        assert_eq!(
            text,
            "series                   mean    stdev\n\
             ew_relative_return       0.74     4.66\n"
        );
    }

    #[test]
    fn plain_with_change_column() {
        let mut rows = vec![
            row(SeriesLabel::Turnover, 33.4, 1.0, Some(-25.8)),
            row(SeriesLabel::TradingProfit, 0.64, 0.5, Some(-0.24)),
        ];
        for r in &mut rows {
            r.cell = "lrg-quarterly-2-tc0".into();
        }
        let text = String::from_utf8(emit_summary(&rows, Format::Plain)).unwrap();
        assert!(text.starts_with("lrg-quarterly-2-tc0\n"));
        assert!(text.contains("  change\n"));
        assert!(text.contains("turnover                33.40     1.00   -25.80\n"));
    }

    #[test]
    fn csv_round_trip() {
        let rows = vec![
            SummaryRow {
                cell: "a".into(),
                series: SeriesLabel::PremiumEstimate,
                mean: 1.0 / 3.0,
                stdev: 0.1,
                change: None,
            },
            SummaryRow {
                cell: "b".into(),
                series: SeriesLabel::Turnover,
                mean: 59.2,
                stdev: 2.0_f64.sqrt(),
                change: Some(-1e-17),
            },
        ];
        let bytes = emit_summary(&rows, Format::Csv);
        assert_eq!(parse_summary(bytes.as_slice()).unwrap(), rows);
    }
}
