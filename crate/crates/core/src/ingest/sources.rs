//! Readers for the two raw input formats: Yahoo Finance daily OHLCV exports
//! and the Johns Hopkins CSSE global confirmed-cases table.

use chrono::{Duration, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const OHLCV_COLUMNS: [&str; 7] = ["Date", "Open", "High", "Low", "Close", "Adj Close", "Volume"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawOhlcvRecord {
    pub date: NaiveDate,
    pub open: f64,
    pub high: f64,
    pub low: f64,
    pub close: f64,
    pub adj_close: f64,
    pub volume: u64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct OhlcvParse {
    pub records: Vec<RawOhlcvRecord>,
    /// Rows skipped because a field held the literal `null`.
    pub dropped: usize,
}

/// Parses a Yahoo Finance history export.
///
/// Rows containing `null` are dropped and counted rather than interpolated.
/// The result is sorted by date; duplicate dates are rejected.
pub fn parse_ohlcv(csv_text: &str) -> Result<OhlcvParse> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(csv_text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::Format(format!("unreadable header: {e}")))?
        .clone();
    let mut index = [0usize; 7];
    for (slot, name) in index.iter_mut().zip(OHLCV_COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Format(format!("missing column `{name}`")))?;
    }

    let mut out = OhlcvParse::default();
    for row in reader.records() {
        let row = row.map_err(|e| Error::Row {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        let field = |i: usize| row.get(index[i]).unwrap_or("");
        if (1..7).any(|i| field(i) == "null") {
            out.dropped += 1;
            continue;
        }
        let date = NaiveDate::parse_from_str(field(0), "%Y-%m-%d").map_err(|e| Error::Row {
            line,
            message: format!("bad date `{}`: {e}", field(0)),
        })?;
        let price = |i: usize| -> Result<f64> {
            let raw = field(i);
            raw.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Row {
                    line,
                    message: format!("bad {} value `{raw}`", OHLCV_COLUMNS[i]),
                })
        };
        let record = RawOhlcvRecord {
            date,
            open: price(1)?,
            high: price(2)?,
            low: price(3)?,
            close: price(4)?,
            adj_close: price(5)?,
            volume: field(6).parse::<u64>().map_err(|_| Error::Row {
                line,
                message: format!("bad Volume value `{}`", field(6)),
            })?,
        };
        let lo = record.open.min(record.close);
        let hi = record.open.max(record.close);
        if !(record.low <= lo && hi <= record.high) {
            return Err(Error::Row {
                line,
                message: "prices violate low <= open/close <= high".into(),
            });
        }
        out.records.push(record);
    }

    out.records.sort_by_key(|r| r.date);
    if let Some(w) = out.records.windows(2).find(|w| w[0].date == w[1].date) {
        return Err(Error::Format(format!("duplicate date {}", w[0].date)));
    }
    Ok(out)
}

/// Cumulative confirmed cases summed over every region, one value per day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseSeries {
    pub dates: Vec<NaiveDate>,
    pub confirmed: Vec<u64>,
}

impl CaseSeries {
    pub fn new(dates: Vec<NaiveDate>, confirmed: Vec<u64>) -> Result<Self> {
        if dates.len() != confirmed.len() {
            return Err(Error::Shape(format!(
                "{} dates but {} counts",
                dates.len(),
                confirmed.len()
            )));
        }
        if let Some(w) = dates.windows(2).find(|w| w[1] - w[0] != Duration::days(1)) {
            return Err(Error::Format(format!(
                "case dates not contiguous daily: {} then {}",
                w[0], w[1]
            )));
        }
        if let Some(i) = confirmed.windows(2).position(|w| w[1] < w[0]) {
            return Err(Error::Data(format!(
                "cumulative count decreases on {}",
                dates[i + 1]
            )));
        }
        Ok(Self { dates, confirmed })
    }

    pub fn start(&self) -> Option<NaiveDate> {
        self.dates.first().copied()
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }
}

fn parse_jhu_date(raw: &str) -> Option<NaiveDate> {
    let mut parts = raw.split('/');
    let month = parts.next()?.parse().ok()?;
    let day = parts.next()?.parse().ok()?;
    let year: i32 = parts.next()?.parse().ok()?;
    if parts.next().is_some() {
        return None;
    }
    let year = if year < 100 { 2000 + year } else { year };
    NaiveDate::from_ymd_opt(year, month, day)
}

/// Parses the JHU CSSE wide time-series table and sums all regions per date.
pub fn parse_jhu_cases(csv_text: &str) -> Result<CaseSeries> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(csv_text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::Format(format!("unreadable header: {e}")))?
        .clone();
    let fixed = ["Province/State", "Country/Region", "Lat", "Long"];
    for (i, name) in fixed.iter().enumerate() {
        if headers.get(i) != Some(name) {
            return Err(Error::Format(format!("missing column `{name}`")));
        }
    }
    let dates = headers
        .iter()
        .skip(fixed.len())
        .map(|h| parse_jhu_date(h).ok_or_else(|| Error::Format(format!("bad date header `{h}`"))))
        .collect::<Result<Vec<_>>>()?;
    if let Some(w) = dates.windows(2).find(|w| w[1] <= w[0]) {
        return Err(Error::Format(format!(
            "date header not increasing: {} then {}",
            w[0], w[1]
        )));
    }

    let mut totals = vec![0u64; dates.len()];
    for row in reader.records() {
        let row = row.map_err(|e| Error::Row {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        for (total, raw) in totals.iter_mut().zip(row.iter().skip(fixed.len())) {
            let value: i64 = raw.parse().map_err(|_| Error::Row {
                line,
                message: format!("bad count `{raw}`"),
            })?;
            if value < 0 {
                return Err(Error::Data(format!("line {line}: negative count {value}")));
            }
            *total += value as u64;
        }
    }
    CaseSeries::new(dates, totals)
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "Date,Open,High,Low,Close,Adj Close,Volume\n";

    #[test]
    fn single_row_maps_fields() {
        let text = format!("{HEADER}2020-04-07,26.08,26.95,23.61,23.63,23.63,1109000\n");
        let parsed = parse_ohlcv(&text).unwrap();
        assert_eq!(parsed.records.len(), 1);
        assert_eq!(parsed.records[0].close, 23.63);
        assert_eq!(parsed.records[0].volume, 1_109_000);
        assert_eq!(parsed.dropped, 0);
    }

    #[test]
    fn header_only_is_empty() {
        let parsed = parse_ohlcv(HEADER).unwrap();
        assert!(parsed.records.is_empty());
        assert_eq!(parsed.dropped, 0);
    }

    #[test]
    fn null_rows_are_dropped_and_counted() {
        let text = format!(
            "{HEADER}2020-04-06,26,27,25,26,26,10\n2020-04-07,null,null,null,null,null,null\n2020-04-08,26,27,25,26,26,10\n"
        );
        let parsed = parse_ohlcv(&text).unwrap();
        assert_eq!(parsed.records.len(), 2);
        assert_eq!(parsed.dropped, 1);
    }

    #[test]
    fn missing_column_is_named() {
        let err = parse_ohlcv("Date,Open,High,Low,Adj Close,Volume\n").unwrap_err();
        assert!(err.to_string().contains("`Close`"), "{err}");
    }

    #[test]
    fn bad_date_reports_line() {
        let text = format!("{HEADER}2020-04-06,26,27,25,26,26,10\n2020/04/07,26,27,25,26,26,10\n");
        match parse_ohlcv(&text).unwrap_err() {
            Error::Row { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn unsorted_rows_are_sorted() {
        let text = format!("{HEADER}2020-04-08,1,2,1,1,1,0\n2020-04-06,1,2,1,1,1,0\n");
        let parsed = parse_ohlcv(&text).unwrap();
        assert!(parsed.records[0].date < parsed.records[1].date);
    }

    #[test]
    fn jhu_column_sums() {
        let text = "Province/State,Country/Region,Lat,Long,1/22/20,1/23/20,1/24/20\n\
                    ,A,0,0,1,2,3\n\
                    \"X, Y\",B,1,1,0,1,1\n";
        let cases = parse_jhu_cases(text).unwrap();
        assert_eq!(cases.confirmed, vec![1, 3, 4]);
        assert_eq!(cases.start(), NaiveDate::from_ymd_opt(2020, 1, 22));
    }

    #[test]
    fn jhu_single_date() {
        let text = "Province/State,Country/Region,Lat,Long,1/22/20\n,China,30,112,555\n";
        let cases = parse_jhu_cases(text).unwrap();
        assert_eq!(cases.len(), 1);
        assert_eq!(cases.confirmed, vec![555]);
    }

    #[test]
    fn jhu_rejects_unordered_dates_and_negative_counts() {
        let text = "Province/State,Country/Region,Lat,Long,1/23/20,1/22/20\n,A,0,0,1,2\n";
        assert!(matches!(parse_jhu_cases(text), Err(Error::Format(_))));
        let text = "Province/State,Country/Region,Lat,Long,1/22/20,1/23/20\n,A,0,0,1,-2\n";
        assert!(matches!(parse_jhu_cases(text), Err(Error::Data(_))));
    }
}
