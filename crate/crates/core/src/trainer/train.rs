use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{HyperParams, MetricScale, PipelineConfig};
use super::features::FeatureSet;
use super::metrics::{mae, rmse};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::ingest::{ScalerParams, WindowedDataset};
use crate::network::{BdLstmModel, Checkpoint, ModelSpec, OptimizerState};

/// Seed for trial `index` of a run, independent of execution order.
pub fn derive_seed(run_seed: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(run_seed);
    rng.set_stream(index.wrapping_add(1));
    rng.gen()
}

pub fn model_spec(hp: &HyperParams, input_size: usize, horizon: usize, dropout: &[f64]) -> ModelSpec {
    ModelSpec {
        input_size,
        bdlstm_sizes: hp.bdlstm_sizes.clone(),
        fc_sizes: hp.fc_sizes.clone(),
        activation: hp.activation,
        horizon,
        dropout: dropout.to_vec(),
        l2: hp.l2,
    }
}

/// Minibatch training loop. One RNG drives initialization, shuffling and
/// dropout seeds; its state is part of the checkpoint, so a resumed run
/// continues bit-for-bit.
#[derive(Debug, Clone)]
pub struct Trainer {
    pub model: BdLstmModel,
    pub optimizer: OptimizerState,
    pub seed: u64,
    pub epoch: usize,
    pub batch_size: usize,
    pub exec: Execution,
    rng: ChaCha8Rng,
}

impl Trainer {
    pub fn new(spec: &ModelSpec, hp: &HyperParams, seed: u64, batch_size: usize, exec: Execution) -> Result<Self> {
        hp.validate()?;
        if batch_size == 0 {
            return Err(Error::Config("batch size must be at least 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = BdLstmModel::new(spec, &mut rng)?;
        let optimizer = OptimizerState::new(hp.optimizer, hp.learning_rate, hp.decay, model.param_count());
        Ok(Self { model, optimizer, seed, epoch: 0, batch_size, exec, rng })
    }

    pub fn resume(checkpoint: Checkpoint, batch_size: usize, exec: Execution) -> Result<Self> {
        checkpoint.validate()?;
        if batch_size == 0 {
            return Err(Error::Config("batch size must be at least 1".into()));
        }
        Ok(Self {
            rng: checkpoint.rng.restore()?,
            model: checkpoint.model,
            optimizer: checkpoint.optimizer,
            seed: checkpoint.seed,
            epoch: checkpoint.epoch,
            batch_size,
            exec,
        })
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint::new(self.seed, self.epoch, self.model.clone(), self.optimizer.clone(), &self.rng)
    }

    /// One pass over `data` in shuffled minibatches. Returns the mean
    /// training loss (with dropout and L2) over the epoch.
    pub fn train_epoch(&mut self, data: &WindowedDataset) -> Result<f64> {
        if data.is_empty() {
            return Err(Error::InsufficientData("no training samples".into()));
        }
        if data.num_features != self.model.input_size() || data.horizon != self.model.horizon() {
            return Err(Error::Shape(format!(
                "dataset is [{} features, horizon {}], model expects [{}, {}]",
                data.num_features,
                data.horizon,
                self.model.input_size(),
                self.model.horizon()
            )));
        }
        let mut order: Vec<usize> = (0..data.num_samples).collect();
        order.shuffle(&mut self.rng);
        let mut total = 0.0;
        for batch in order.chunks(self.batch_size) {
            let seeds: Vec<u64> = batch.iter().map(|_| self.rng.gen()).collect();
            let inputs: Vec<&[f64]> = batch.iter().map(|&s| data.input(s)).collect();
            let targets: Vec<&[f64]> = batch.iter().map(|&s| data.target(s)).collect();
            let (loss, grads) = self.model.loss_and_gradient(&inputs, &targets, Some(&seeds), self.exec)?;
            self.optimizer.step(&mut self.model.params, &grads)?;
            total += loss * batch.len() as f64;
        }
        self.epoch += 1;
        Ok(total / data.num_samples as f64)
    }

    /// Runs `epochs` more epochs and returns their losses.
    pub fn fit(&mut self, data: &WindowedDataset, epochs: usize) -> Result<Vec<f64>> {
        (0..epochs).map(|_| self.train_epoch(data)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    /// Predictions `[samples x horizon]` in scaled units.
    pub predictions: Vec<f64>,
    pub mae: f64,
    pub rmse: f64,
}

/// Inference-mode predictions and metrics over every window of `data`.
/// With a scaler, both targets and predictions are mapped back to price
/// units before scoring.
pub fn evaluate(
    model: &BdLstmModel,
    data: &WindowedDataset,
    price_scale: Option<&ScalerParams>,
    exec: Execution,
) -> Result<Evaluation> {
    if data.is_empty() {
        return Err(Error::InsufficientData("no evaluation samples".into()));
    }
    let rows = exec.map_range(data.num_samples, |i| model.predict(data.input(i)));
    let mut predictions = Vec::with_capacity(data.targets.len());
    for r in rows {
        predictions.extend(r?);
    }
    let (y, y_hat) = match price_scale {
        None => (data.targets.clone(), predictions.clone()),
        Some(s) => {
            let unscale = |v: &[f64]| {
                v.iter()
                    .map(|&x| s.unscale_value(&data.target_column, x))
                    .collect::<Result<Vec<_>>>()
            };
            (unscale(&data.targets)?, unscale(&predictions)?)
        }
    };
    let (m, r) = (mae(&y, &y_hat)?, rmse(&y, &y_hat)?);
    if !(r.is_finite() && m.is_finite()) {
        return Err(Error::Numeric("non-finite evaluation metric".into()));
    }
    Ok(Evaluation { predictions, mae: m, rmse: r })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrialStatus {
    Ok,
    Failed,
}

/// One trained and evaluated configuration. `wall_time` is not serialized so
/// that result files stay identical across runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub index: usize,
    pub hyperparams: HyperParams,
    pub seed: u64,
    pub status: TrialStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    pub train_loss_trace: Vec<f64>,
    pub rmse: Option<f64>,
    pub mae: Option<f64>,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl TrialResult {
    pub fn is_ok(&self) -> bool {
        self.status == TrialStatus::Ok
    }
}

/// Trains on `features.train` and scores on `features.test`. A diverging or
/// otherwise failing trial is returned with `status: failed`.
pub fn train_and_evaluate(
    index: usize,
    hp: &HyperParams,
    features: &FeatureSet,
    config: &PipelineConfig,
    seed: u64,
    exec: Execution,
) -> TrialResult {
    let start = Instant::now();
    let mut trace = Vec::with_capacity(config.epochs);
    let outcome = (|| {
        let spec = model_spec(hp, features.train.num_features, features.train.horizon, &config.dropout);
        let mut trainer = Trainer::new(&spec, hp, seed, config.batch_size, exec)?;
        for _ in 0..config.epochs {
            let loss = trainer.train_epoch(&features.train)?;
            trace.push(loss);
        }
        let scale = (config.metric_scale == MetricScale::Price).then_some(&features.pipeline.scaler);
        evaluate(&trainer.model, &features.test, scale, exec)
    })();
    let (status, failure, rmse, mae) = match outcome {
        Ok(e) => (TrialStatus::Ok, None, Some(e.rmse), Some(e.mae)),
        Err(e) => (TrialStatus::Failed, Some(e.to_string()), None, None),
    };
    TrialResult {
        index,
        hyperparams: hp.clone(),
        seed,
        status,
        failure,
        train_loss_trace: trace,
        rmse,
        mae,
        wall_time: start.elapsed(),
    }
}
