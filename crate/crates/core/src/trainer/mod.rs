//! Feature construction, training, grid search, forecasting and
//! configuration comparison.
//!
//! Three input configurations are supported: the scaled raw series (`RAW`),
//! approximation plus detail coefficients for every series (`WT_AD`), and the
//! same with only the approximation for case counts (`WT_ADA`). Targets are
//! always the scaled raw target column. Metrics are computed on scaled values
//! unless [`MetricScale::Price`] is selected.

mod artifact;
mod compare;
mod config;
mod features;
mod forecast;
mod grid;
mod metrics;
mod train;

pub use artifact::{TrainedPipeline, PIPELINE_FORMAT};
pub use compare::{compare_configurations, ComparisonCell, ComparisonReport, Spread};
pub use config::{
    format_sizes, parse_sizes, Budget, DecompositionScope, HyperParams, HyperSpace, MetricScale, Mode, PipelineConfig,
};
pub use features::{build_features, fit_training_scaler, meyer, FeaturePipeline, FeatureSet};
pub use forecast::{forecast, next_weekdays, ForecastReport, ForecastRow, Forecaster};
pub use grid::{grid_search, plan_trials, rank_trials, GridSearchReport};
pub use metrics::{mae, rmse};
pub use train::{
    derive_seed, evaluate, model_spec, train_and_evaluate, Evaluation, Trainer, TrialResult, TrialStatus,
};
