use serde::{Deserialize, Serialize};

use super::config::{HyperParams, Mode, PipelineConfig};
use super::features::{build_features, FeatureSet};
use super::train::{train_and_evaluate, TrialResult};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::ingest::TimeSeriesFrame;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spread {
    pub median: f64,
    pub min: f64,
    pub max: f64,
}

impl Spread {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        let median = if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) };
        Some(Self { median, min: v[0], max: v[n - 1] })
    }
}

/// One (target, mode) cell over all seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonCell {
    pub target: String,
    pub mode: Mode,
    pub runs: Vec<TrialResult>,
    pub rmse: Option<Spread>,
    pub mae: Option<Spread>,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub hyperparams: HyperParams,
    pub horizon: usize,
    pub lookback: usize,
    pub seeds: Vec<u64>,
    pub cells: Vec<ComparisonCell>,
}

impl ComparisonReport {
    pub fn cell(&self, target: &str, mode: Mode) -> Option<&ComparisonCell> {
        self.cells.iter().find(|c| c.target == target && c.mode == mode)
    }
}

/// Trains `hp` under every mode for every target and seed, and summarizes
/// test RMSE/MAE per (target, mode).
pub fn compare_configurations(
    frame: &TimeSeriesFrame,
    hp: &HyperParams,
    config: &PipelineConfig,
    targets: &[String],
    modes: &[Mode],
    seeds: &[u64],
    exec: Execution,
) -> Result<ComparisonReport> {
    if seeds.is_empty() || targets.is_empty() || modes.is_empty() {
        return Err(Error::Config("comparison needs at least one seed, target and mode".into()));
    }
    let mut cells: Vec<(String, Mode, PipelineConfig)> = Vec::new();
    for target in targets {
        for &mode in modes {
            let cfg = PipelineConfig { mode, target: target.clone(), ..config.clone() };
            cells.push((target.clone(), mode, cfg));
        }
    }
    let features: Vec<FeatureSet> = exec
        .map(&cells, |(_, _, cfg)| build_features(frame, cfg, exec))
        .into_iter()
        .collect::<Result<_>>()?;
    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..seeds.len()).map(move |s| (c, s)))
        .collect();
    let mut results = exec
        .map(&jobs, |&(c, s)| train_and_evaluate(s, hp, &features[c], &cells[c].2, seeds[s], exec))
        .into_iter();
    let cells = cells
        .into_iter()
        .map(|(target, mode, _)| {
            let runs: Vec<TrialResult> = results.by_ref().take(seeds.len()).collect();
            let rmse: Vec<f64> = runs.iter().filter_map(|r| r.rmse).collect();
            let mae: Vec<f64> = runs.iter().filter_map(|r| r.mae).collect();
            ComparisonCell {
                target,
                mode,
                failed: runs.len() - rmse.len(),
                rmse: Spread::of(&rmse),
                mae: Spread::of(&mae),
                runs,
            }
        })
        .collect();
    Ok(ComparisonReport {
        hyperparams: hp.clone(),
        horizon: config.horizon,
        lookback: config.lookback,
        seeds: seeds.to_vec(),
        cells,
    })
}
