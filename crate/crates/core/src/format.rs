//! End-of-day text formats: parsing rows into bars and writing the canonical
//! panel snapshot.
//!
//! Two input layouts are understood. A long file carries
//! `symbol,date,open,high,low,close,volume` per row with ISO dates. A per-day
//! file carries `symbol,open,high,low,close,volume` and takes its date from a
//! file name such as `NYSE_20220301.txt`. Either may start with a header line,
//! recognised by a second field that is not a date (long) or not a number
//! (per-day). The snapshot is the long layout with a header, sorted by date
//! then symbol, using shortest round-trip float formatting.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use chrono::NaiveDate;
use thiserror::Error;

use crate::bar::{BarError, OhlcvBar};
use crate::panel::{EodRecord, MarketPanel};

pub const LONG_HEADER: &str = "symbol,date,open,high,low,close,volume";
pub const PER_DAY_HEADER: &str = "symbol,open,high,low,close,volume";

/// Layout of one input text.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EodFormat {
    Long,
    /// Rows without a date column, all dated `date`.
    PerDay(NaiveDate),
}

impl EodFormat {
    fn columns(self) -> usize {
        match self {
            EodFormat::Long => 7,
            EodFormat::PerDay(_) => 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RowErrorKind {
    #[error("expected {expected} columns, found {found}")]
    ColumnCount { expected: usize, found: usize },
    #[error("empty symbol")]
    EmptySymbol,
    #[error("unparseable date {0:?}")]
    BadDate(String),
    #[error("unparseable {column} {text:?}")]
    BadNumber { column: &'static str, text: String },
    #[error(transparent)]
    Bar(#[from] BarError),
}

/// A rejected row, with its 1-based line number.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}: {kind}")]
pub struct RowError {
    pub line: usize,
    pub kind: RowErrorKind,
}

/// One parsed row, borrowing the symbol from the input text.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EodRow<'a> {
    pub line: usize,
    pub symbol: &'a str,
    pub date: NaiveDate,
    pub bar: OhlcvBar,
}

impl EodRow<'_> {
    pub fn to_record(&self) -> EodRecord {
        EodRecord { symbol: self.symbol.to_string(), date: self.date, bar: self.bar }
    }
}

/// Parses `YYYY-MM-DD`.
pub fn parse_iso_date(s: &str) -> Option<NaiveDate> {
    let b = s.as_bytes();
    if b.len() != 10 || b[4] != b'-' || b[7] != b'-' {
        return None;
    }
    let year = digits(&b[0..4])?;
    let month = digits(&b[5..7])?;
    let day = digits(&b[8..10])?;
    NaiveDate::from_ymd_opt(year as i32, month, day)
}

fn digits(b: &[u8]) -> Option<u32> {
    b.iter().try_fold(0u32, |acc, c| match c {
        b'0'..=b'9' => Some(acc * 10 + u32::from(c - b'0')),
        _ => None,
    })
}

/// Date encoded in a per-day file name `<MARKET>_YYYYMMDD.txt`.
pub fn per_day_file_date(file_name: &str) -> Option<NaiveDate> {
    let stem = file_name.strip_suffix(".txt")?;
    let (market, stamp) = stem.rsplit_once('_')?;
    let b = stamp.as_bytes();
    if market.is_empty() || b.len() != 8 {
        return None;
    }
    NaiveDate::from_ymd_opt(digits(&b[0..4])? as i32, digits(&b[4..6])?, digits(&b[6..8])?)
}

fn parse_price(column: &'static str, text: &str) -> Result<f64, RowErrorKind> {
    text.parse::<f64>()
        .map_err(|_| RowErrorKind::BadNumber { column, text: text.to_string() })
}

/// Volumes are counts; integral decimals such as `1200.0` are accepted.
fn parse_volume(text: &str) -> Result<u64, RowErrorKind> {
    if let Ok(v) = text.parse::<u64>() {
        return Ok(v);
    }
    match text.parse::<f64>() {
        Ok(v) if v >= 0.0 && v <= u64::MAX as f64 && libm::trunc(v) == v => Ok(v as u64),
        _ => Err(RowErrorKind::BadNumber { column: "volume", text: text.to_string() }),
    }
}

fn is_header(format: EodFormat, fields: &[&str]) -> bool {
    let Some(second) = fields.get(1) else { return false };
    match format {
        EodFormat::Long => parse_iso_date(second).is_none(),
        EodFormat::PerDay(_) => second.parse::<f64>().is_err(),
    }
}

fn parse_fields<'a>(
    format: EodFormat,
    fields: &[&'a str],
) -> Result<(&'a str, NaiveDate, OhlcvBar), RowErrorKind> {
    if fields.len() != format.columns() {
        return Err(RowErrorKind::ColumnCount { expected: format.columns(), found: fields.len() });
    }
    let symbol = fields[0];
    if symbol.is_empty() {
        return Err(RowErrorKind::EmptySymbol);
    }
    let (date, rest) = match format {
        EodFormat::Long => {
            let date = parse_iso_date(fields[1])
                .ok_or_else(|| RowErrorKind::BadDate(fields[1].to_string()))?;
            (date, &fields[2..])
        }
        EodFormat::PerDay(date) => (date, &fields[1..]),
    };
    let bar = OhlcvBar::new(
        parse_price("open", rest[0])?,
        parse_price("high", rest[1])?,
        parse_price("low", rest[2])?,
        parse_price("close", rest[3])?,
        parse_volume(rest[4])?,
    )?;
    Ok((symbol, date, bar))
}

/// Streaming parser over the rows of one text. Blank lines are skipped.
#[derive(Debug, Clone)]
pub struct EodRows<'a> {
    format: EodFormat,
    lines: core::iter::Enumerate<core::str::Lines<'a>>,
    first: bool,
    fields: Vec<&'a str>,
}

impl<'a> EodRows<'a> {
    pub fn new(text: &'a str, format: EodFormat) -> Self {
        Self { format, lines: text.lines().enumerate(), first: true, fields: Vec::with_capacity(8) }
    }
}

impl<'a> Iterator for EodRows<'a> {
    type Item = Result<EodRow<'a>, RowError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let (i, raw) = self.lines.next()?;
            let text = raw.trim();
            if text.is_empty() {
                continue;
            }
            self.fields.clear();
            self.fields.extend(text.split(',').map(str::trim));
            let first = core::mem::replace(&mut self.first, false);
            if first && is_header(self.format, &self.fields) {
                continue;
            }
            let line = i + 1;
            return Some(
                parse_fields(self.format, &self.fields)
                    .map(|(symbol, date, bar)| EodRow { line, symbol, date, bar })
                    .map_err(|kind| RowError { line, kind }),
            );
        }
    }
}

/// Valid records in input order together with the rejected rows.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParsedRecords {
    pub records: Vec<EodRecord>,
    pub errors: Vec<RowError>,
}

pub fn parse_eod_records(text: &str, format: EodFormat) -> ParsedRecords {
    let mut out = ParsedRecords::default();
    for row in EodRows::new(text, format) {
        match row {
            Ok(row) => out.records.push(row.to_record()),
            Err(e) => out.errors.push(e),
        }
    }
    out
}

/// Writes one long-format row, newline included.
pub fn write_long_row<W: fmt::Write>(
    out: &mut W,
    symbol: &str,
    date: NaiveDate,
    bar: &OhlcvBar,
) -> fmt::Result {
    writeln!(
        out,
        "{symbol},{date},{},{},{},{},{}",
        bar.open(),
        bar.high(),
        bar.low(),
        bar.close(),
        bar.volume()
    )
}

/// Writes the panel in the canonical snapshot layout.
pub fn write_snapshot<W: fmt::Write>(panel: &MarketPanel, out: &mut W) -> fmt::Result {
    out.write_str(LONG_HEADER)?;
    out.write_char('\n')?;
    for (date, symbol, bar) in panel.records() {
        write_long_row(out, symbol, date, bar)?;
    }
    Ok(())
}

pub fn snapshot_string(panel: &MarketPanel) -> String {
    let mut s = String::with_capacity(64 * (panel.n_bars() + 1));
    write_snapshot(panel, &mut s).expect("writing to a String cannot fail");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::panel::build_panel;

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    #[test]
    fn long_row_maps_fields() {
        let p = parse_eod_records("AAA,2022-03-01,100,110,95,105,1000", EodFormat::Long);
        assert!(p.errors.is_empty());
        assert_eq!(p.records[0].symbol, "AAA");
        assert_eq!(p.records[0].date, d(2022, 3, 1));
        assert_eq!(p.records[0].bar, OhlcvBar::new(100.0, 110.0, 95.0, 105.0, 1000).unwrap());
    }

    #[test]
    fn bar_invariant_violation_is_a_row_error() {
        let p = parse_eod_records("AAA,2022-03-01,100,90,95,105,1000", EodFormat::Long);
        assert!(p.records.is_empty());
        assert_eq!(p.errors[0].line, 1);
        assert!(matches!(p.errors[0].kind, RowErrorKind::Bar(BarError::HighBelowBody { .. })));
    }

    #[test]
    fn malformed_row_is_tagged_with_its_line() {
        let text = "AAA,2022-03-01,100,110,95,105,1000\nBBB,2022-03-01,1,2\nCCC,2022-03-01,5,5,5,5,7\n";
        let p = parse_eod_records(text, EodFormat::Long);
        assert_eq!(p.records.len(), 2);
        assert_eq!(p.errors.len(), 1);
        assert_eq!(p.errors[0].line, 2);
        assert_eq!(p.errors[0].kind, RowErrorKind::ColumnCount { expected: 7, found: 4 });
    }

    #[test]
    fn empty_input_is_empty() {
        assert_eq!(parse_eod_records("", EodFormat::Long), ParsedRecords::default());
        assert_eq!(parse_eod_records("\n\n", EodFormat::PerDay(d(2020, 1, 2))), ParsedRecords::default());
    }

    #[test]
    fn headers_are_detected() {
        let text = "symbol,open,high,low,close,volume\r\nAAA,1,2,0.5,1.5,10\r\n";
        let p = parse_eod_records(text, EodFormat::PerDay(d(2021, 6, 1)));
        assert!(p.errors.is_empty());
        assert_eq!(p.records.len(), 1);
        assert_eq!(p.records[0].date, d(2021, 6, 1));

        let p = parse_eod_records("AAA,1,2,0.5,1.5,10\n", EodFormat::PerDay(d(2021, 6, 1)));
        assert_eq!(p.records.len(), 1);

        let p = parse_eod_records(&[LONG_HEADER, "A,2020-01-02,1,1,1,1,1"].join("\n"), EodFormat::Long);
        assert_eq!((p.records.len(), p.errors.len()), (1, 0));
    }

    #[test]
    fn only_the_first_line_can_be_a_header() {
        let text = "A,2020-01-02,1,1,1,1,1\nsymbol,date,open,high,low,close,volume\n";
        let p = parse_eod_records(text, EodFormat::Long);
        assert_eq!(p.errors.len(), 1);
        assert_eq!(p.errors[0].line, 2);
    }

    #[test]
    fn bad_numbers_and_dates() {
        let p = parse_eod_records(
            "A,2020-01-02,x,1,1,1,1\nA,2020-02-30,1,1,1,1,1\nA,2020-01-02,1,1,1,1,-4\nA,2020-01-02,1,1,1,1,3.5",
            EodFormat::Long,
        );
        assert_eq!(p.errors.len(), 4);
        assert!(matches!(p.errors[0].kind, RowErrorKind::BadNumber { column: "open", .. }));
        assert!(matches!(p.errors[1].kind, RowErrorKind::BadDate(_)));
        assert!(matches!(p.errors[2].kind, RowErrorKind::BadNumber { column: "volume", .. }));
        assert!(matches!(p.errors[3].kind, RowErrorKind::BadNumber { column: "volume", .. }));
        let p = parse_eod_records("A,2020-01-02,1,1,1,1,1200.0", EodFormat::Long);
        assert_eq!(p.records[0].bar.volume(), 1200);
    }

    #[test]
    fn file_name_dates() {
        assert_eq!(per_day_file_date("NYSE_20220301.txt"), Some(d(2022, 3, 1)));
        assert_eq!(per_day_file_date("MY_MARKET_20001231.txt"), Some(d(2000, 12, 31)));
        assert_eq!(per_day_file_date("NYSE_20220230.txt"), None);
        assert_eq!(per_day_file_date("_20220301.txt"), None);
        assert_eq!(per_day_file_date("NYSE_20220301.csv"), None);
        assert_eq!(per_day_file_date("NYSE_2022031.txt"), None);
    }

    #[test]
    fn snapshot_is_sorted_and_round_trips() {
        let text = "B,2020-01-03,1.1,1.3,1,1.2,5\nA,2020-01-03,0.1,0.30000000000000004,0.1,0.2,7\nB,2020-01-02,2,2,2,2,0\n";
        let panel = build_panel(parse_eod_records(text, EodFormat::Long).records).unwrap();
        let snap = snapshot_string(&panel);
        assert_eq!(
            snap,
            "symbol,date,open,high,low,close,volume\n\
             B,2020-01-02,2,2,2,2,0\n\
             A,2020-01-03,0.1,0.30000000000000004,0.1,0.2,7\n\
             B,2020-01-03,1.1,1.3,1,1.2,5\n"
        );
        let again = build_panel(parse_eod_records(&snap, EodFormat::Long).records).unwrap();
        assert_eq!(again, panel);
        assert_eq!(snapshot_string(&again), snap);
    }
}
