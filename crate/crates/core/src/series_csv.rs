//! Date-indexed numeric columns as CSV, shared by every emitted series.

use std::io::{Read, Write};

use chrono::NaiveDate;

use crate::error::{Error, Result};

/// A parsed series file: dates plus one vector per value column.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesTable {
    pub dates: Vec<NaiveDate>,
    pub columns: Vec<Vec<f64>>,
}

/// Writes `header` (which must start with `date`) and one row per date.
pub fn write_columns<W: Write>(
    sink: W,
    header: &[&str],
    dates: &[NaiveDate],
    columns: &[&[f64]],
) -> Result<()> {
    if header.len() != columns.len() + 1 {
        return Err(Error::Misaligned(format!(
            "{} header fields for {} columns",
            header.len(),
            columns.len()
        )));
    }
    if let Some(c) = columns.iter().find(|c| c.len() != dates.len()) {
        return Err(Error::Misaligned(format!(
            "column of length {} against {} dates",
            c.len(),
            dates.len()
        )));
    }
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(header)?;
    let mut row = Vec::with_capacity(header.len());
    for (i, date) in dates.iter().enumerate() {
        row.clear();
        row.push(date.format("%Y-%m-%d").to_string());
        row.extend(columns.iter().map(|c| c[i].to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_columns<R: Read>(source: R, header: &[&str]) -> Result<SeriesTable> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
    let found = reader.headers()?.clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(Error::MalformedRow {
            line: 1,
            reason: format!("expected header `{}`", header.join(",")),
        });
    }
    let mut table = SeriesTable {
        dates: Vec::new(),
        columns: vec![Vec::new(); header.len() - 1],
    };
    for row in reader.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let bad = |reason: String| Error::MalformedRow { line, reason };
        if row.len() != header.len() {
            return Err(bad(format!("expected {} fields", header.len())));
        }
        table.dates.push(
            NaiveDate::parse_from_str(&row[0], "%Y-%m-%d")
                .map_err(|e| bad(format!("bad date `{}`: {e}", &row[0])))?,
        );
        for (col, field) in table.columns.iter_mut().zip(row.iter().skip(1)) {
            col.push(field.parse().map_err(|e| bad(format!("bad number `{field}`: {e}")))?);
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn round_trip(values in prop::collection::vec((any::<f64>().prop_filter("finite", |v| v.is_finite()), -1e3f64..1e3), 0..50)) {
            let start = NaiveDate::from_ymd_opt(1999, 12, 30).unwrap();
            let dates: Vec<_> = (0..values.len() as u64).map(|i| start + chrono::Days::new(i)).collect();
            let a: Vec<f64> = values.iter().map(|v| v.0).collect();
            let b: Vec<f64> = values.iter().map(|v| v.1).collect();
            let mut buf = Vec::new();
            write_columns(&mut buf, &["date", "a", "b"], &dates, &[&a, &b]).unwrap();
            let t = read_columns(buf.as_slice(), &["date", "a", "b"]).unwrap();
            prop_assert_eq!(t.dates, dates);
            prop_assert_eq!(&t.columns[0], &a);
            prop_assert_eq!(&t.columns[1], &b);
        }
    }

    #[test]
    fn rejects_length_mismatch() {
        let d = [NaiveDate::from_ymd_opt(2000, 1, 1).unwrap()];
        assert!(write_columns(Vec::new(), &["date", "x"], &d, &[&[1.0, 2.0]]).is_err());
    }
}
