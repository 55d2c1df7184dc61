use chrono::NaiveDate;

use super::frame::TimeSeriesFrame;
use crate::error::{Error, Result};

/// Supervised samples cut from a chronological feature matrix.
///
/// `inputs` is row-major `[num_samples][lookback][num_features]`,
/// `targets` is `[num_samples][horizon]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowedDataset {
    pub inputs: Vec<f64>,
    pub targets: Vec<f64>,
    pub num_samples: usize,
    pub lookback: usize,
    pub horizon: usize,
    pub num_features: usize,
    pub feature_names: Vec<String>,
    pub target_column: String,
    /// Date of the last input row of each sample.
    pub last_input_dates: Vec<NaiveDate>,
    /// Date of the first target row of each sample.
    pub first_target_dates: Vec<NaiveDate>,
}

impl WindowedDataset {
    pub fn input(&self, sample: usize) -> &[f64] {
        let len = self.lookback * self.num_features;
        &self.inputs[sample * len..(sample + 1) * len]
    }

    pub fn target(&self, sample: usize) -> &[f64] {
        &self.targets[sample * self.horizon..(sample + 1) * self.horizon]
    }

    pub fn is_empty(&self) -> bool {
        self.num_samples == 0
    }

    /// Keeps only the listed samples, in the given order.
    pub fn select(&self, samples: &[usize]) -> WindowedDataset {
        let mut out = WindowedDataset {
            inputs: Vec::with_capacity(samples.len() * self.lookback * self.num_features),
            targets: Vec::with_capacity(samples.len() * self.horizon),
            num_samples: samples.len(),
            last_input_dates: Vec::with_capacity(samples.len()),
            first_target_dates: Vec::with_capacity(samples.len()),
            feature_names: self.feature_names.clone(),
            target_column: self.target_column.clone(),
            ..*self
        };
        for &s in samples {
            out.inputs.extend_from_slice(self.input(s));
            out.targets.extend_from_slice(self.target(s));
            out.last_input_dates.push(self.last_input_dates[s]);
            out.first_target_dates.push(self.first_target_dates[s]);
        }
        out
    }
}

/// Windows every column of `features` with targets from a separate series
/// sharing the same rows.
pub fn make_windows_with_target(
    features: &TimeSeriesFrame,
    target: &[f64],
    target_column: &str,
    lookback: usize,
    horizon: usize,
) -> Result<WindowedDataset> {
    if lookback == 0 || horizon == 0 {
        return Err(Error::Window("lookback and horizon must be positive".into()));
    }
    if target.len() != features.len() {
        return Err(Error::Shape(format!(
            "target has {} rows, features {}",
            target.len(),
            features.len()
        )));
    }
    let rows = features.len();
    if rows < lookback + horizon {
        return Err(Error::Window(format!(
            "{rows} rows cannot hold lookback {lookback} + horizon {horizon}"
        )));
    }
    let num_samples = rows - lookback - horizon + 1;
    let width = features.width();
    let dates = features.dates();
    let columns = features.columns();
    let mut inputs = Vec::with_capacity(num_samples * lookback * width);
    let mut targets = Vec::with_capacity(num_samples * horizon);
    for i in 0..num_samples {
        for row in i..i + lookback {
            inputs.extend(columns.iter().map(|c| c[row]));
        }
        targets.extend_from_slice(&target[i + lookback..i + lookback + horizon]);
    }
    Ok(WindowedDataset {
        inputs,
        targets,
        num_samples,
        lookback,
        horizon,
        num_features: width,
        feature_names: features.names().to_vec(),
        target_column: target_column.to_owned(),
        last_input_dates: (0..num_samples).map(|i| dates[i + lookback - 1]).collect(),
        first_target_dates: (0..num_samples).map(|i| dates[i + lookback]).collect(),
    })
}

/// Windows every column of `frame`, taking targets from `target_column`.
pub fn make_windows(
    frame: &TimeSeriesFrame,
    lookback: usize,
    horizon: usize,
    target_column: &str,
) -> Result<WindowedDataset> {
    let target = frame
        .column(target_column)
        .ok_or_else(|| Error::Window(format!("no target column `{target_column}`")))?;
    make_windows_with_target(frame, target, target_column, lookback, horizon)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame(rows: usize) -> TimeSeriesFrame {
        let start = NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
        let dates = (0..rows).map(|i| start + chrono::Duration::days(i as i64)).collect();
        let a = (0..rows).map(|i| i as f64).collect();
        let b = (0..rows).map(|i| 100.0 + i as f64).collect();
        TimeSeriesFrame::new(dates, vec!["a".into(), "b".into()], vec![a, b]).unwrap()
    }

    #[test]
    fn sample_counts() {
        assert_eq!(make_windows(&frame(10), 3, 1, "a").unwrap().num_samples, 7);
        assert_eq!(make_windows(&frame(133), 128, 5, "a").unwrap().num_samples, 1);
    }

    #[test]
    fn first_sample_rows() {
        let ds = make_windows(&frame(6), 2, 2, "a").unwrap();
        assert_eq!(ds.input(0), &[0.0, 100.0, 1.0, 101.0]);
        assert_eq!(ds.target(0), &[2.0, 3.0]);
    }

    #[test]
    fn too_few_rows() {
        assert!(matches!(make_windows(&frame(4), 3, 2, "a"), Err(Error::Window(_))));
    }

    #[test]
    fn no_leakage_in_dates() {
        let ds = make_windows(&frame(30), 5, 3, "b").unwrap();
        assert!(ds.last_input_dates.iter().zip(&ds.first_target_dates).all(|(a, b)| a < b));
    }
}
