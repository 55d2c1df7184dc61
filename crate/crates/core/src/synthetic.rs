//! Seeded synthetic market data in the same raw formats the ingest layer
//! reads: four price series built from a trend, two sinusoids and noise, and
//! a cumulative, logistic-shaped case count.

use std::f64::consts::PI;
use std::fmt::Write as _;

use chrono::{Datelike, Days, NaiveDate, Weekday};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::Result;
use crate::ingest::{align, parse_jhu_cases, parse_ohlcv, PriceSeries, TimeSeriesFrame, PRICE_COLUMNS};

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    /// Trading days generated per instrument.
    pub rows: usize,
    pub seed: u64,
    pub start: NaiveDate,
    /// Noise standard deviation relative to the price level.
    pub noise: f64,
    /// Fraction of the rows after which cases start to accumulate.
    pub outbreak_at: f64,
    /// Replace one close of the first instrument with `null`.
    pub inject_null: bool,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            rows: 2000,
            seed: 0,
            start: NaiveDate::from_ymd_opt(2012, 1, 2).expect("valid date"),
            noise: 0.01,
            outbreak_at: 0.6,
            inject_null: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSources {
    /// `(column name, Yahoo-style OHLCV CSV)` per instrument.
    pub ohlcv: Vec<(String, String)>,
    /// JHU-style wide confirmed-cases CSV.
    pub cases: String,
}

fn weekdays(start: NaiveDate, n: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(n);
    let mut d = start;
    while out.len() < n {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d = d + Days::new(1);
    }
    out
}

pub fn synthetic_sources(spec: &SyntheticSpec) -> SyntheticSources {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let dates = weekdays(spec.start, spec.rows);
    let n = spec.rows.max(1) as f64;
    let levels = [60.0, 20_000.0, 2_500.0, 7_000.0];
    let noise = Normal::new(0.0, spec.noise.max(0.0)).expect("finite noise");
    let mut ohlcv = Vec::new();
    for (k, (name, level)) in PRICE_COLUMNS.iter().zip(levels).enumerate() {
        let trend = rng.gen_range(-0.3..0.6);
        let (p1, p2) = (rng.gen_range(40.0..80.0), rng.gen_range(150.0..300.0));
        let (f1, f2) = (rng.gen_range(0.0..2.0 * PI), rng.gen_range(0.0..2.0 * PI));
        let mut csv = String::from("Date,Open,High,Low,Close,Adj Close,Volume\n");
        let mut prev = level;
        for (t, d) in dates.iter().enumerate() {
            let tf = t as f64;
            let close = level
                * (1.0
                    + trend * tf / n
                    + 0.08 * (2.0 * PI * tf / p1 + f1).sin()
                    + 0.04 * (2.0 * PI * tf / p2 + f2).sin()
                    + noise.sample(&mut rng));
            let open = prev;
            let high = open.max(close) * 1.002;
            let low = open.min(close) * 0.998;
            let volume = rng.gen_range(1_000_000..5_000_000u64);
            if spec.inject_null && k == 0 && t == dates.len() / 3 {
                writeln!(csv, "{d},null,null,null,null,null,null").expect("write to string");
            } else {
                writeln!(csv, "{d},{open:.6},{high:.6},{low:.6},{close:.6},{close:.6},{volume}").expect("write to string");
            }
            prev = close;
        }
        ohlcv.push(((*name).to_owned(), csv));
    }

    let first = dates[((spec.outbreak_at * n) as usize).min(dates.len() - 1)];
    let last = *dates.last().expect("at least one row");
    let days = (last - first).num_days() as usize + 1;
    let mut header = String::from("Province/State,Country/Region,Lat,Long");
    let (mut a, mut b) = (String::from(",Alpha,10.0,20.0"), String::from("North,Beta,-5.5,100.25"));
    let width = days as f64 / 8.0;
    let mut total_prev = 0u64;
    for i in 0..days {
        let d = first + Days::new(i as u64);
        write!(header, ",{}/{}/{:02}", d.month(), d.day(), d.year() % 100).expect("write to string");
        let total = (1_000_000.0 / (1.0 + (-(i as f64 - days as f64 / 2.0) / width).exp())).round() as u64;
        let total = total.max(total_prev).max(1);
        total_prev = total;
        let share = total * 3 / 5;
        write!(a, ",{share}").expect("write to string");
        write!(b, ",{}", total - share).expect("write to string");
    }
    SyntheticSources { ohlcv, cases: format!("{header}\n{a}\n{b}\n") }
}

/// The aligned frame the pipeline would build from [`synthetic_sources`].
pub fn synthetic_frame(spec: &SyntheticSpec) -> Result<TimeSeriesFrame> {
    let sources = synthetic_sources(spec);
    let mut series = Vec::new();
    for (name, csv) in &sources.ohlcv {
        let parsed = parse_ohlcv(csv)?;
        series.push(PriceSeries::from_records(name.clone(), &parsed.records));
    }
    align(&series, &parse_jhu_cases(&sources.cases)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::COVID_COLUMN;

    #[test]
    fn frame_shape() {
        let f = synthetic_frame(&SyntheticSpec { rows: 300, ..Default::default() }).unwrap();
        assert_eq!(f.len(), 300);
        assert_eq!(f.names(), ["crude_oil", "dji", "sp500", "nasdaq", "covid_cases"]);
        let cases = f.column(COVID_COLUMN).unwrap();
        assert_eq!(cases[0], 0.0);
        assert!(cases[299] > 0.0);
        assert!(cases.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn null_row_is_dropped() {
        let spec = SyntheticSpec { rows: 300, inject_null: true, ..Default::default() };
        assert_eq!(synthetic_frame(&spec).unwrap().len(), 299);
    }

    #[test]
    fn seeded() {
        let spec = SyntheticSpec { rows: 50, seed: 9, ..Default::default() };
        assert_eq!(synthetic_sources(&spec), synthetic_sources(&spec));
        let other = SyntheticSpec { seed: 10, ..spec.clone() };
        assert_ne!(synthetic_sources(&spec), synthetic_sources(&other));
    }
}
