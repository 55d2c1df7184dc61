use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::ops::Range;

use chrono::NaiveDate;

use super::sources::{CaseSeries, RawOhlcvRecord};
use crate::error::{Error, Result};

pub const COVID_COLUMN: &str = "covid_cases";
pub const PRICE_COLUMNS: [&str; 4] = ["crude_oil", "dji", "sp500", "nasdaq"];

/// Closing prices of one instrument keyed by trading date.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    pub name: String,
    pub dates: Vec<NaiveDate>,
    pub close: Vec<f64>,
}

impl PriceSeries {
    pub fn from_records(name: impl Into<String>, records: &[RawOhlcvRecord]) -> Self {
        Self {
            name: name.into(),
            dates: records.iter().map(|r| r.date).collect(),
            close: records.iter().map(|r| r.close).collect(),
        }
    }
}

/// Date-indexed multivariate series, stored column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesFrame {
    dates: Vec<NaiveDate>,
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
}

impl TimeSeriesFrame {
    pub fn new(dates: Vec<NaiveDate>, names: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Self> {
        if names.len() != columns.len() {
            return Err(Error::Shape(format!(
                "{} column names for {} columns",
                names.len(),
                columns.len()
            )));
        }
        if let Some((name, col)) = names.iter().zip(&columns).find(|(_, c)| c.len() != dates.len()) {
            return Err(Error::Shape(format!(
                "column `{name}` has {} rows, expected {}",
                col.len(),
                dates.len()
            )));
        }
        if let Some((name, _)) = names
            .iter()
            .zip(&columns)
            .find(|(_, c)| c.iter().any(|v| !v.is_finite()))
        {
            return Err(Error::Data(format!("column `{name}` has missing or non-finite values")));
        }
        if dates.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Data("frame dates must be strictly increasing".into()));
        }
        let unique: BTreeSet<&String> = names.iter().collect();
        if unique.len() != names.len() {
            return Err(Error::Data("duplicate column names".into()));
        }
        Ok(Self {
            dates,
            names,
            columns,
        })
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn width(&self) -> usize {
        self.columns.len()
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.column_index(name).map(|i| self.columns[i].as_slice())
    }

    pub fn require_column(&self, name: &str) -> Result<&[f64]> {
        self.column(name)
            .ok_or_else(|| Error::Config(format!("no column named `{name}`")))
    }

    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.columns[col][row]
    }

    pub fn slice_rows(&self, rows: Range<usize>) -> TimeSeriesFrame {
        TimeSeriesFrame {
            dates: self.dates[rows.clone()].to_vec(),
            names: self.names.clone(),
            columns: self.columns.iter().map(|c| c[rows.clone()].to_vec()).collect(),
        }
    }

    /// Appends the rows of `other`, which must share columns and follow chronologically.
    pub fn concat(&self, other: &TimeSeriesFrame) -> Result<TimeSeriesFrame> {
        if self.names != other.names {
            return Err(Error::Shape("cannot concatenate frames with different columns".into()));
        }
        let mut dates = self.dates.clone();
        dates.extend_from_slice(&other.dates);
        let columns = self
            .columns
            .iter()
            .zip(&other.columns)
            .map(|(a, b)| a.iter().chain(b).copied().collect())
            .collect();
        TimeSeriesFrame::new(dates, self.names.clone(), columns)
    }

    pub fn with_columns(&self, names: Vec<String>, columns: Vec<Vec<f64>>) -> Result<TimeSeriesFrame> {
        TimeSeriesFrame::new(self.dates.clone(), names, columns)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("date");
        for name in &self.names {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for (row, date) in self.dates.iter().enumerate() {
            let _ = write!(out, "{}", date.format("%Y-%m-%d"));
            for col in &self.columns {
                let _ = write!(out, ",{}", col[row]);
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<TimeSeriesFrame> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers = reader
            .headers()
            .map_err(|e| Error::Format(format!("unreadable header: {e}")))?
            .clone();
        if headers.get(0) != Some("date") {
            return Err(Error::Format("missing column `date`".into()));
        }
        let names: Vec<String> = headers.iter().skip(1).map(str::to_owned).collect();
        let mut dates = Vec::new();
        let mut columns = vec![Vec::new(); names.len()];
        for row in reader.records() {
            let row = row.map_err(|e| Error::Row {
                line: e.position().map_or(0, |p| p.line() as usize),
                message: e.to_string(),
            })?;
            let line = row.position().map_or(0, |p| p.line() as usize);
            let raw_date = row.get(0).unwrap_or("");
            dates.push(
                NaiveDate::parse_from_str(raw_date, "%Y-%m-%d").map_err(|e| Error::Row {
                    line,
                    message: format!("bad date `{raw_date}`: {e}"),
                })?,
            );
            for (col, raw) in columns.iter_mut().zip(row.iter().skip(1)) {
                col.push(raw.parse::<f64>().map_err(|_| Error::Row {
                    line,
                    message: format!("bad number `{raw}`"),
                })?);
            }
        }
        TimeSeriesFrame::new(dates, names, columns)
    }
}

/// Joins closing-price series on their common trading dates and appends the
/// cumulative case count as a final `covid_cases` column.
///
/// Dates before the first case observation get 0. A trading date missing from
/// the daily case series takes the latest earlier count.
pub fn align(series: &[PriceSeries], cases: &CaseSeries) -> Result<TimeSeriesFrame> {
    if series.is_empty() {
        return Err(Error::Alignment("no price series supplied".into()));
    }
    if let Some(empty) = series.iter().find(|s| s.dates.is_empty()) {
        return Err(Error::Alignment(format!("price series `{}` is empty", empty.name)));
    }
    let mut common: BTreeSet<NaiveDate> = series[0].dates.iter().copied().collect();
    for s in &series[1..] {
        let these: BTreeSet<NaiveDate> = s.dates.iter().copied().collect();
        common = common.intersection(&these).copied().collect();
    }
    if common.is_empty() {
        return Err(Error::Alignment("price series share no trading dates".into()));
    }
    let dates: Vec<NaiveDate> = common.into_iter().collect();

    let mut names = Vec::with_capacity(series.len() + 1);
    let mut columns = Vec::with_capacity(series.len() + 1);
    for s in series {
        let mut column = Vec::with_capacity(dates.len());
        let mut cursor = 0;
        for d in &dates {
            // both sorted; advance through the series
            while s.dates[cursor] < *d {
                cursor += 1;
            }
            column.push(s.close[cursor]);
        }
        names.push(s.name.clone());
        columns.push(column);
    }

    let mut covid = Vec::with_capacity(dates.len());
    for d in &dates {
        let upto = cases.dates.partition_point(|c| c <= d);
        covid.push(if upto == 0 { 0.0 } else { cases.confirmed[upto - 1] as f64 });
    }
    names.push(COVID_COLUMN.to_owned());
    columns.push(covid);
    TimeSeriesFrame::new(dates, names, columns)
}

/// Splits rows chronologically; the training part gets `floor(n * fraction)` rows.
pub fn chronological_split(
    frame: &TimeSeriesFrame,
    train_fraction: f64,
    min_rows: usize,
) -> Result<(TimeSeriesFrame, TimeSeriesFrame)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::Split(format!(
            "train fraction {train_fraction} outside (0, 1)"
        )));
    }
    let n = frame.len();
    let n_train = (n as f64 * train_fraction).floor() as usize;
    let n_test = n - n_train;
    if n_train < min_rows.max(1) || n_test < min_rows.max(1) {
        return Err(Error::Split(format!(
            "split of {n} rows gives {n_train}/{n_test}, need at least {} each",
            min_rows.max(1)
        )));
    }
    Ok((frame.slice_rows(0..n_train), frame.slice_rows(n_train..n)))
}
