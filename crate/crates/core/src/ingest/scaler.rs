use serde::{Deserialize, Serialize};

use super::frame::TimeSeriesFrame;
use crate::error::{Error, Result};

/// Per-column min/max learned from the training partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerParams {
    pub columns: Vec<String>,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl ScalerParams {
    fn position(&self, column: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == column)
            .ok_or_else(|| Error::Scaler(format!("column `{column}` was not fitted")))
    }

    pub fn scale_value(&self, column: &str, x: f64) -> Result<f64> {
        let i = self.position(column)?;
        Ok((x - self.min[i]) / (self.max[i] - self.min[i]))
    }

    pub fn unscale_value(&self, column: &str, x: f64) -> Result<f64> {
        let i = self.position(column)?;
        Ok(x * (self.max[i] - self.min[i]) + self.min[i])
    }
}

/// Fits min-max parameters for `columns`; a constant column is rejected.
pub fn fit_scaler(frame: &TimeSeriesFrame, columns: &[String]) -> Result<ScalerParams> {
    let mut params = ScalerParams {
        columns: Vec::with_capacity(columns.len()),
        min: Vec::with_capacity(columns.len()),
        max: Vec::with_capacity(columns.len()),
    };
    for name in columns {
        let col = frame
            .column(name)
            .ok_or_else(|| Error::Scaler(format!("no column named `{name}`")))?;
        let (lo, hi) = col
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
        if !(hi > lo) {
            return Err(Error::Scaler(format!("column `{name}` is constant on the fitting rows")));
        }
        params.columns.push(name.clone());
        params.min.push(lo);
        params.max.push(hi);
    }
    Ok(params)
}

fn map_columns(
    frame: &TimeSeriesFrame,
    params: &ScalerParams,
    f: impl Fn(f64, f64, f64) -> f64,
) -> Result<TimeSeriesFrame> {
    let mut columns = frame.columns().to_vec();
    for (i, name) in params.columns.iter().enumerate() {
        let idx = frame
            .column_index(name)
            .ok_or_else(|| Error::Scaler(format!("frame has no column `{name}`")))?;
        let (lo, hi) = (params.min[i], params.max[i]);
        for x in &mut columns[idx] {
            *x = f(*x, lo, hi);
        }
    }
    frame.with_columns(frame.names().to_vec(), columns)
}

pub fn apply_scaler(frame: &TimeSeriesFrame, params: &ScalerParams) -> Result<TimeSeriesFrame> {
    map_columns(frame, params, |x, lo, hi| (x - lo) / (hi - lo))
}

pub fn invert_scaler(frame: &TimeSeriesFrame, params: &ScalerParams) -> Result<TimeSeriesFrame> {
    map_columns(frame, params, |x, lo, hi| x * (hi - lo) + lo)
}

/// Stateful wrapper for callers that fit once and transform later.
#[derive(Debug, Clone, Default)]
pub struct MinMaxScaler {
    params: Option<ScalerParams>,
}

impl MinMaxScaler {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn fit(&mut self, frame: &TimeSeriesFrame, columns: &[String]) -> Result<&ScalerParams> {
        Ok(self.params.insert(fit_scaler(frame, columns)?))
    }

    pub fn params(&self) -> Result<&ScalerParams> {
        self.params
            .as_ref()
            .ok_or_else(|| Error::State("scaler used before fit".into()))
    }

    pub fn transform(&self, frame: &TimeSeriesFrame) -> Result<TimeSeriesFrame> {
        apply_scaler(frame, self.params()?)
    }

    pub fn inverse_transform(&self, frame: &TimeSeriesFrame) -> Result<TimeSeriesFrame> {
        invert_scaler(frame, self.params()?)
    }
}
