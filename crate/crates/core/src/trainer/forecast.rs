use chrono::{Datelike, Days, NaiveDate, Weekday};
use serde::{Deserialize, Serialize};

use super::features::FeaturePipeline;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::ingest::TimeSeriesFrame;
use crate::network::BdLstmModel;

/// Anything mapping a `[lookback x features]` window to `horizon` scaled values.
pub trait Forecaster {
    fn horizon(&self) -> usize;
    fn predict(&self, window: &[f64]) -> Result<Vec<f64>>;
}

impl Forecaster for BdLstmModel {
    fn horizon(&self) -> usize {
        BdLstmModel::horizon(self)
    }

    fn predict(&self, window: &[f64]) -> Result<Vec<f64>> {
        BdLstmModel::predict(self, window)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastRow {
    pub date: NaiveDate,
    pub scaled: f64,
    pub predicted_price: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastReport {
    pub target: String,
    pub last_observed: NaiveDate,
    pub rows: Vec<ForecastRow>,
}

impl ForecastReport {
    /// `date,predicted_price`
    pub fn to_csv(&self) -> String {
        let mut out = String::from("date,predicted_price\n");
        for r in &self.rows {
            out.push_str(&format!("{},{}\n", r.date.format("%Y-%m-%d"), r.predicted_price));
        }
        out
    }
}

/// The `count` weekdays following `after`.
pub fn next_weekdays(after: NaiveDate, count: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(count);
    let mut d = after;
    while out.len() < count {
        d = d + Days::new(1);
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
    }
    out
}

/// Predicts the `horizon` trading days after the last row of `frame` from
/// its last `lookback` rows, in price units.
pub fn forecast<M: Forecaster + ?Sized>(
    model: &M,
    frame: &TimeSeriesFrame,
    pipeline: &FeaturePipeline,
    exec: Execution,
) -> Result<ForecastReport> {
    if model.horizon() != pipeline.horizon {
        return Err(Error::Shape(format!(
            "model predicts {} steps, pipeline horizon is {}",
            model.horizon(),
            pipeline.horizon
        )));
    }
    let window = pipeline.latest_input(frame, exec)?;
    let scaled = model.predict(&window)?;
    let last = *frame
        .dates()
        .last()
        .ok_or_else(|| Error::InsufficientData("empty frame".into()))?;
    let rows = next_weekdays(last, scaled.len())
        .into_iter()
        .zip(scaled)
        .map(|(date, s)| {
            Ok(ForecastRow { date, scaled: s, predicted_price: pipeline.scaler.unscale_value(&pipeline.target, s)? })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ForecastReport { target: pipeline.target.clone(), last_observed: last, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::ScalerParams;
    use crate::trainer::{DecompositionScope, Mode};

    /// Repeats the last observed value of feature 0.
    struct LastValue {
        horizon: usize,
        width: usize,
    }

    impl Forecaster for LastValue {
        fn horizon(&self) -> usize {
            self.horizon
        }

        fn predict(&self, window: &[f64]) -> Result<Vec<f64>> {
            Ok(vec![window[window.len() - self.width]; self.horizon])
        }
    }

    fn frame() -> TimeSeriesFrame {
        // 2020-01-01 is a Wednesday
        let start = NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
        let dates = (0..10).map(|i| start + Days::new(i)).collect();
        let close: Vec<f64> = (0..10).map(|i| 17.45 + i as f64).collect();
        let other: Vec<f64> = (0..10).map(|i| i as f64).collect();
        TimeSeriesFrame::new(dates, vec!["crude_oil".into(), "x".into()], vec![close, other]).unwrap()
    }

    fn pipeline(horizon: usize) -> FeaturePipeline {
        FeaturePipeline {
            mode: Mode::Raw,
            levels: 5,
            scope: DecompositionScope::PerPartition,
            lookback: 4,
            horizon,
            target: "crude_oil".into(),
            columns: vec!["crude_oil".into(), "x".into()],
            scaler: ScalerParams {
                columns: vec!["crude_oil".into(), "x".into()],
                min: vec![17.45, 0.0],
                max: vec![145.18, 9.0],
            },
            feature_names: vec!["crude_oil".into(), "x".into()],
            context_rows: 4,
        }
    }

    #[test]
    fn toy_model_repeats_last_close() {
        let report = forecast(&LastValue { horizon: 5, width: 2 }, &frame(), &pipeline(5), Execution::Sequential).unwrap();
        assert_eq!(report.rows.len(), 5);
        let last_scaled = (26.45 - 17.45) / (145.18 - 17.45);
        for r in &report.rows {
            assert!((r.scaled - last_scaled).abs() < 1e-15);
            assert!((r.predicted_price - 26.45).abs() < 1e-9);
        }
        // 2020-01-10 is a Friday
        let dates: Vec<String> = report.rows.iter().map(|r| r.date.to_string()).collect();
        assert_eq!(dates, ["2020-01-13", "2020-01-14", "2020-01-15", "2020-01-16", "2020-01-17"]);
        assert_eq!(report.to_csv().lines().count(), 6);
    }

    #[test]
    fn midpoint_unscales_to_known_price() {
        let p = pipeline(1);
        assert!((p.scaler.unscale_value("crude_oil", 0.5).unwrap() - 81.315).abs() < 1e-9);
    }

    #[test]
    fn insufficient_history() {
        let f = frame().slice_rows(0..3);
        assert!(matches!(
            forecast(&LastValue { horizon: 5, width: 2 }, &f, &pipeline(5), Execution::Sequential),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn horizon_mismatch() {
        assert!(forecast(&LastValue { horizon: 2, width: 2 }, &frame(), &pipeline(5), Execution::Sequential).is_err());
    }
}
