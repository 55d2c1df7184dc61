use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::config::{DecompositionScope, Mode, PipelineConfig};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::ingest::{
    apply_scaler, chronological_split, make_windows_with_target, ScalerParams, TimeSeriesFrame, WindowedDataset,
};
use crate::swt::{decompose_frame, dmey, FilterPair};

/// The synthesized discrete Meyer pair, built once per process.
pub fn meyer() -> Result<&'static FilterPair> {
    static FILTERS: OnceLock<FilterPair> = OnceLock::new();
    if let Some(f) = FILTERS.get() {
        return Ok(f);
    }
    let f = dmey()?;
    Ok(FILTERS.get_or_init(|| f))
}

/// What is needed to turn a raw frame into model inputs exactly as during
/// training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeaturePipeline {
    pub mode: Mode,
    pub levels: usize,
    pub scope: DecompositionScope,
    pub lookback: usize,
    pub horizon: usize,
    pub target: String,
    /// Raw frame columns, in model order.
    pub columns: Vec<String>,
    pub scaler: ScalerParams,
    pub feature_names: Vec<String>,
    /// Trailing rows decomposed together at inference time under
    /// per-partition scope (the length of the evaluation partition).
    pub context_rows: usize,
}

#[derive(Debug, Clone)]
pub struct FeatureSet {
    pub train: WindowedDataset,
    pub test: WindowedDataset,
    pub pipeline: FeaturePipeline,
    pub train_rows: usize,
    pub test_rows: usize,
}

/// Min-max parameters from the training rows.
///
/// A non-target column that is constant on the training rows (cumulative
/// case counts before the outbreak are all zero) takes its range from the
/// whole frame instead. The target column is always fitted on training rows
/// only.
pub fn fit_training_scaler(train: &TimeSeriesFrame, full: &TimeSeriesFrame, target: &str) -> Result<ScalerParams> {
    let mut params = ScalerParams { columns: Vec::new(), min: Vec::new(), max: Vec::new() };
    for name in train.names() {
        let range = |col: &[f64]| {
            col.iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
        };
        let (mut lo, mut hi) = range(train.require_column(name)?);
        if !(hi > lo) && name != target {
            (lo, hi) = range(full.require_column(name)?);
        }
        if !(hi > lo) {
            return Err(Error::Scaler(format!("column `{name}` is constant on the fitting rows")));
        }
        params.columns.push(name.clone());
        params.min.push(lo);
        params.max.push(hi);
    }
    Ok(params)
}

fn transform(scaled: &TimeSeriesFrame, mode: Mode, levels: usize, exec: Execution) -> Result<TimeSeriesFrame> {
    match mode.decomposition() {
        None => Ok(scaled.clone()),
        Some(dm) => decompose_frame(scaled, levels, dm, meyer()?, exec),
    }
}

fn select_columns(frame: &TimeSeriesFrame, names: &[String]) -> Result<TimeSeriesFrame> {
    let columns = names
        .iter()
        .map(|n| frame.require_column(n).map(<[f64]>::to_vec))
        .collect::<Result<Vec<_>>>()?;
    TimeSeriesFrame::new(frame.dates().to_vec(), names.to_vec(), columns)
}

/// Splits, scales (fitted on the training rows), optionally decomposes and
/// windows `frame`. Targets always come from the scaled raw target column.
pub fn build_features(frame: &TimeSeriesFrame, config: &PipelineConfig, exec: Execution) -> Result<FeatureSet> {
    config.validate()?;
    frame.require_column(&config.target)?;
    let min_rows = config.lookback + config.horizon;
    let (train_raw, test_raw) = chronological_split(frame, config.train_fraction, min_rows)?;
    let scaler = fit_training_scaler(&train_raw, frame, &config.target)?;
    let train_scaled = apply_scaler(&train_raw, &scaler)?;
    let test_scaled = apply_scaler(&test_raw, &scaler)?;
    let (train_feat, test_feat) = match config.scope {
        DecompositionScope::PerPartition => (
            transform(&train_scaled, config.mode, config.levels, exec)?,
            transform(&test_scaled, config.mode, config.levels, exec)?,
        ),
        DecompositionScope::FullSeries => {
            let all = transform(&train_scaled.concat(&test_scaled)?, config.mode, config.levels, exec)?;
            (all.slice_rows(0..train_raw.len()), all.slice_rows(train_raw.len()..all.len()))
        }
    };
    let window = |feat: &TimeSeriesFrame, scaled: &TimeSeriesFrame| {
        make_windows_with_target(
            feat,
            scaled.require_column(&config.target)?,
            &config.target,
            config.lookback,
            config.horizon,
        )
    };
    let train = window(&train_feat, &train_scaled)?;
    let test = window(&test_feat, &test_scaled)?;
    Ok(FeatureSet {
        pipeline: FeaturePipeline {
            mode: config.mode,
            levels: config.levels,
            scope: config.scope,
            lookback: config.lookback,
            horizon: config.horizon,
            target: config.target.clone(),
            columns: frame.names().to_vec(),
            scaler,
            feature_names: train.feature_names.clone(),
            context_rows: test_raw.len(),
        },
        train,
        test,
        train_rows: train_raw.len(),
        test_rows: test_raw.len(),
    })
}

impl FeaturePipeline {
    /// Model input `[lookback x features]` built from the last rows of `frame`.
    pub fn latest_input(&self, frame: &TimeSeriesFrame, exec: Execution) -> Result<Vec<f64>> {
        if frame.len() < self.lookback {
            return Err(Error::InsufficientData(format!(
                "{} rows available, lookback needs {}",
                frame.len(),
                self.lookback
            )));
        }
        let raw = select_columns(frame, &self.columns)?;
        let scaled = apply_scaler(&raw, &self.scaler)?;
        let segment = match (self.mode, self.scope) {
            (Mode::Raw, _) => scaled.slice_rows(scaled.len() - self.lookback..scaled.len()),
            (_, DecompositionScope::FullSeries) => scaled,
            (_, DecompositionScope::PerPartition) => {
                let rows = self.context_rows.max(self.lookback).min(scaled.len());
                scaled.slice_rows(scaled.len() - rows..scaled.len())
            }
        };
        let features = transform(&segment, self.mode, self.levels, exec)?;
        if features.names() != self.feature_names.as_slice() {
            return Err(Error::Shape("features differ from the ones the model was trained on".into()));
        }
        let start = features.len() - self.lookback;
        let mut out = Vec::with_capacity(self.lookback * features.width());
        for row in start..features.len() {
            out.extend(features.columns().iter().map(|c| c[row]));
        }
        Ok(out)
    }
}
