use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{HyperParams, PipelineConfig};
use super::features::FeaturePipeline;
use crate::error::{Error, Result};
use crate::network::Checkpoint;

pub const PIPELINE_FORMAT: &str = "wavecast-pipeline/1";

/// A trained model together with the preprocessing it was trained behind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedPipeline {
    pub format: String,
    pub config: PipelineConfig,
    pub hyperparams: HyperParams,
    pub features: FeaturePipeline,
    pub checkpoint: Checkpoint,
    pub train_loss_trace: Vec<f64>,
    pub rmse: Option<f64>,
    pub mae: Option<f64>,
}

impl TrainedPipeline {
    pub fn new(
        config: PipelineConfig,
        hyperparams: HyperParams,
        features: FeaturePipeline,
        checkpoint: Checkpoint,
    ) -> Self {
        Self {
            format: PIPELINE_FORMAT.to_owned(),
            config,
            hyperparams,
            features,
            checkpoint,
            train_loss_trace: Vec::new(),
            rmse: None,
            mae: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.format != PIPELINE_FORMAT {
            return Err(Error::Format(format!("unsupported model file format `{}`", self.format)));
        }
        self.checkpoint.validate()?;
        let model = &self.checkpoint.model;
        if model.input_size() != self.features.feature_names.len() || model.horizon() != self.features.horizon {
            return Err(Error::Format("network shape does not match its feature pipeline".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: Self = serde_json::from_str(text)?;
        p.validate()?;
        Ok(p)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}
