use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::cell::LstmCellParams;
use super::dense::{Activation, DenseLayer};
use super::layer::{BdLstmLayer, LayerTrace};
use crate::error::{Error, Result};
use crate::exec::Execution;

/// Samples per gradient accumulation chunk. Fixed so the floating-point
/// reduction order does not depend on the thread count.
const GRAD_CHUNK: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub input_size: usize,
    pub bdlstm_sizes: Vec<usize>,
    pub fc_sizes: Vec<usize>,
    pub activation: Activation,
    pub horizon: usize,
    /// Dropout per BDLSTM layer; layers past the end of the list reuse its last entry.
    pub dropout: Vec<f64>,
    pub l2: f64,
}

impl ModelSpec {
    fn dropout_for(&self, layer: usize) -> f64 {
        self.dropout
            .get(layer)
            .or(self.dropout.last())
            .copied()
            .unwrap_or(0.0)
    }

    fn validate(&self) -> Result<()> {
        if self.input_size == 0 || self.horizon == 0 {
            return Err(Error::Config("input size and horizon must be positive".into()));
        }
        if self.bdlstm_sizes.is_empty() || self.bdlstm_sizes.contains(&0) || self.fc_sizes.contains(&0) {
            return Err(Error::Config("layer widths must be positive and at least one BDLSTM layer given".into()));
        }
        if let Some(p) = self.dropout.iter().find(|p| !(0.0..1.0).contains(*p)) {
            return Err(Error::Config(format!("dropout {p} outside [0, 1)")));
        }
        if !(self.l2 >= 0.0) {
            return Err(Error::Config(format!("negative L2 coefficient {}", self.l2)));
        }
        Ok(())
    }
}

/// Stacked bidirectional LSTM layers, a dense stack fed by the last time
/// step of the final BDLSTM layer, and an identity output layer with one unit
/// per forecast step. All parameters live in `params`; the layer structs
/// record where.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BdLstmModel {
    pub bdlstm_layers: Vec<BdLstmLayer>,
    pub dense_layers: Vec<DenseLayer>,
    pub output_layer: DenseLayer,
    pub l2: f64,
    pub params: Vec<f64>,
}

pub(crate) struct ModelTrace {
    layers: Vec<LayerTrace>,
    dense_inputs: Vec<Vec<f64>>,
    dense_pre: Vec<Vec<f64>>,
    pub output: Vec<f64>,
}

impl BdLstmModel {
    /// Builds the layout with every parameter zero.
    pub fn zeros(spec: &ModelSpec) -> Result<Self> {
        spec.validate()?;
        let mut offset = 0;
        let mut input = spec.input_size;
        let mut bdlstm_layers = Vec::with_capacity(spec.bdlstm_sizes.len());
        for (i, &hidden) in spec.bdlstm_sizes.iter().enumerate() {
            let forward_cell = LstmCellParams { input_size: input, hidden_size: hidden, offset };
            offset += forward_cell.len();
            let backward_cell = LstmCellParams { input_size: input, hidden_size: hidden, offset };
            offset += backward_cell.len();
            bdlstm_layers.push(BdLstmLayer { forward_cell, backward_cell, dropout: spec.dropout_for(i) });
            input = 2 * hidden;
        }
        let mut dense_layers = Vec::with_capacity(spec.fc_sizes.len());
        for &width in &spec.fc_sizes {
            let layer = DenseLayer { input_size: input, output_size: width, activation: spec.activation, offset };
            offset += layer.len();
            dense_layers.push(layer);
            input = width;
        }
        let output_layer = DenseLayer {
            input_size: input,
            output_size: spec.horizon,
            activation: Activation::Identity,
            offset,
        };
        offset += output_layer.len();
        Ok(Self {
            bdlstm_layers,
            dense_layers,
            output_layer,
            l2: spec.l2,
            params: vec![0.0; offset],
        })
    }

    /// Uniform `+-sqrt(1/fan_in)` weights, zero biases except a forget-gate
    /// bias of 1.
    pub fn new<R: Rng>(spec: &ModelSpec, rng: &mut R) -> Result<Self> {
        let mut model = Self::zeros(spec)?;
        let mut fill = |params: &mut [f64], range: Range<usize>, fan_in: usize| {
            let bound = (1.0 / fan_in as f64).sqrt();
            for v in &mut params[range] {
                *v = rng.gen_range(-bound..=bound);
            }
        };
        for layer in &model.bdlstm_layers {
            for cell in [layer.forward_cell, layer.backward_cell] {
                fill(&mut model.params, cell.w_range(), cell.input_size);
                fill(&mut model.params, cell.u_range(), cell.hidden_size);
                let b = cell.b_range();
                model.params[b.start..b.start + cell.hidden_size].fill(1.0);
            }
        }
        for layer in model.dense_layers.iter().chain(std::iter::once(&model.output_layer)) {
            fill(&mut model.params, layer.w_range(), layer.input_size);
        }
        Ok(model)
    }

    pub fn input_size(&self) -> usize {
        self.bdlstm_layers[0].input_size()
    }

    pub fn horizon(&self) -> usize {
        self.output_layer.output_size
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    /// Ranges of weight matrices (`W`, `U`, dense `W`); biases are excluded.
    pub fn weight_ranges(&self) -> Vec<Range<usize>> {
        let mut out = Vec::new();
        for layer in &self.bdlstm_layers {
            for cell in [layer.forward_cell, layer.backward_cell] {
                out.push(cell.w_range());
                out.push(cell.u_range());
            }
        }
        for layer in self.dense_layers.iter().chain(std::iter::once(&self.output_layer)) {
            out.push(layer.w_range());
        }
        out
    }

    /// `l2 * sum(W^2)` over all weight matrices.
    pub fn l2_penalty(&self) -> f64 {
        if self.l2 == 0.0 {
            return 0.0;
        }
        let sum: f64 = self
            .weight_ranges()
            .into_iter()
            .map(|r| self.params[r].iter().map(|w| w * w).sum::<f64>())
            .sum();
        self.l2 * sum
    }

    fn check_sequence(&self, sequence: &[f64]) -> Result<()> {
        let width = self.input_size();
        if sequence.is_empty() || sequence.len() % width != 0 {
            return Err(Error::Shape(format!(
                "sequence of {} values is not a non-empty [T x {width}] matrix",
                sequence.len()
            )));
        }
        Ok(())
    }

    pub(crate) fn forward_trace(&self, sequence: &[f64], mut dropout_rng: Option<&mut ChaCha8Rng>) -> ModelTrace {
        let mut layers: Vec<LayerTrace> = Vec::with_capacity(self.bdlstm_layers.len());
        for layer in &self.bdlstm_layers {
            let input = layers.last().map_or(sequence, |t| t.output.as_slice());
            let trace = layer.forward_trace(&self.params, input, dropout_rng.as_deref_mut());
            layers.push(trace);
        }
        let last = self.bdlstm_layers.last().expect("at least one BDLSTM layer");
        let width = last.output_size();
        let out = &layers.last().expect("trace per layer").output;
        let mut x = out[out.len() - width..].to_vec();
        let mut dense_inputs = Vec::with_capacity(self.dense_layers.len() + 1);
        let mut dense_pre = Vec::with_capacity(self.dense_layers.len() + 1);
        for layer in self.dense_layers.iter().chain(std::iter::once(&self.output_layer)) {
            let (z, a) = layer.forward(&self.params, &x);
            dense_inputs.push(std::mem::replace(&mut x, a));
            dense_pre.push(z);
        }
        ModelTrace { layers, dense_inputs, dense_pre, output: x }
    }

    /// Inference forward pass (no dropout).
    pub fn predict(&self, sequence: &[f64]) -> Result<Vec<f64>> {
        self.check_sequence(sequence)?;
        let out = self.forward_trace(sequence, None).output;
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("non-finite prediction".into()));
        }
        Ok(out)
    }

    /// Forward pass; with `training` set, dropout masks are drawn from `rng`.
    pub fn forward<R: Rng>(&self, sequence: &[f64], training: bool, rng: &mut R) -> Result<Vec<f64>> {
        self.check_sequence(sequence)?;
        if !training {
            return self.predict(sequence);
        }
        let mut mask_rng = ChaCha8Rng::seed_from_u64(rng.gen());
        Ok(self.forward_trace(sequence, Some(&mut mask_rng)).output)
    }

    /// Mean squared error over every output plus the L2 penalty.
    pub fn loss(&self, predictions: &[f64], targets: &[f64]) -> Result<f64> {
        if predictions.len() != targets.len() || predictions.is_empty() {
            return Err(Error::Shape(format!(
                "{} predictions for {} targets",
                predictions.len(),
                targets.len()
            )));
        }
        let mse = predictions
            .iter()
            .zip(targets)
            .map(|(p, t)| (p - t) * (p - t))
            .sum::<f64>()
            / predictions.len() as f64;
        Ok(mse + self.l2_penalty())
    }

    /// Gradient of `scale * sum((y_hat - y)^2)` for one sample, added into `grads`.
    /// Returns the sample's squared error sum.
    fn accumulate_sample(
        &self,
        sequence: &[f64],
        target: &[f64],
        scale: f64,
        mask_seed: Option<u64>,
        grads: &mut [f64],
    ) -> f64 {
        let mut rng = mask_seed.map(ChaCha8Rng::seed_from_u64);
        let trace = self.forward_trace(sequence, rng.as_mut());
        let mut sq = 0.0;
        let mut d = Vec::with_capacity(target.len());
        for (p, t) in trace.output.iter().zip(target) {
            sq += (p - t) * (p - t);
            d.push(2.0 * scale * (p - t));
        }
        let heads: Vec<&DenseLayer> = self.dense_layers.iter().chain(std::iter::once(&self.output_layer)).collect();
        for (i, layer) in heads.iter().enumerate().rev() {
            d = layer.backward(&self.params, &trace.dense_inputs[i], &trace.dense_pre[i], &d, grads);
        }
        let steps = sequence.len() / self.input_size();
        for (i, layer) in self.bdlstm_layers.iter().enumerate().rev() {
            let width = layer.output_size();
            let d_out = if i + 1 == self.bdlstm_layers.len() {
                let mut full = vec![0.0; steps * width];
                full[(steps - 1) * width..].copy_from_slice(&d);
                full
            } else {
                d
            };
            let input = if i == 0 { sequence } else { trace.layers[i - 1].output.as_slice() };
            d = layer.backward(&self.params, input, &trace.layers[i], &d_out, grads);
        }
        sq
    }

    /// Loss and exact gradient over a batch.
    ///
    /// `mask_seeds` supplies one dropout seed per sample; `None` disables
    /// dropout. The gradient includes the L2 term `2 * l2 * W`.
    pub fn loss_and_gradient(
        &self,
        inputs: &[&[f64]],
        targets: &[&[f64]],
        mask_seeds: Option<&[u64]>,
        exec: Execution,
    ) -> Result<(f64, Vec<f64>)> {
        self.validate_batch(inputs, targets, mask_seeds)?;
        let horizon = self.horizon();
        let scale = 1.0 / (inputs.len() * horizon) as f64;
        let chunks = inputs.len().div_ceil(GRAD_CHUNK);
        let partials = exec.map_range(chunks, |c| {
            let mut grads = vec![0.0; self.params.len()];
            let mut sq = 0.0;
            for s in c * GRAD_CHUNK..((c + 1) * GRAD_CHUNK).min(inputs.len()) {
                sq += self.accumulate_sample(inputs[s], targets[s], scale, mask_seeds.map(|m| m[s]), &mut grads);
            }
            (sq, grads)
        });
        let mut grads = vec![0.0; self.params.len()];
        let mut sq = 0.0;
        for (s, g) in partials {
            sq += s;
            for (a, b) in grads.iter_mut().zip(&g) {
                *a += b;
            }
        }
        if self.l2 != 0.0 {
            for range in self.weight_ranges() {
                for (g, w) in grads[range.clone()].iter_mut().zip(&self.params[range]) {
                    *g += 2.0 * self.l2 * w;
                }
            }
        }
        let loss = sq * scale + self.l2_penalty();
        if !loss.is_finite() || grads.iter().any(|g| !g.is_finite()) {
            return Err(Error::Numeric("non-finite loss or gradient".into()));
        }
        Ok((loss, grads))
    }

    /// Batch loss under the same dropout masks [`Self::loss_and_gradient`] would draw.
    pub fn batch_loss(&self, inputs: &[&[f64]], targets: &[&[f64]], mask_seeds: Option<&[u64]>) -> Result<f64> {
        self.validate_batch(inputs, targets, mask_seeds)?;
        let mut sq = 0.0;
        for (s, (x, y)) in inputs.iter().zip(targets).enumerate() {
            let mut rng = mask_seeds.map(|m| ChaCha8Rng::seed_from_u64(m[s]));
            let out = self.forward_trace(x, rng.as_mut()).output;
            sq += out.iter().zip(y.iter()).map(|(p, t)| (p - t) * (p - t)).sum::<f64>();
        }
        Ok(sq / (inputs.len() * self.horizon()) as f64 + self.l2_penalty())
    }

    fn validate_batch(&self, inputs: &[&[f64]], targets: &[&[f64]], mask_seeds: Option<&[u64]>) -> Result<()> {
        if inputs.is_empty() || inputs.len() != targets.len() {
            return Err(Error::Shape(format!("{} inputs for {} targets", inputs.len(), targets.len())));
        }
        if mask_seeds.is_some_and(|m| m.len() != inputs.len()) {
            return Err(Error::Shape("one dropout seed per sample required".into()));
        }
        for (x, y) in inputs.iter().zip(targets) {
            self.check_sequence(x)?;
            if y.len() != self.horizon() {
                return Err(Error::Shape(format!("target of {} values, horizon {}", y.len(), self.horizon())));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> ModelSpec {
        ModelSpec {
            input_size: 3,
            bdlstm_sizes: vec![4, 2],
            fc_sizes: vec![5],
            activation: Activation::Tanh,
            horizon: 2,
            dropout: vec![0.2, 0.1],
            l2: 0.0,
        }
    }

    #[test]
    fn layout_is_contiguous() {
        let m = BdLstmModel::zeros(&spec()).unwrap();
        assert_eq!(m.bdlstm_layers[1].input_size(), 8);
        assert_eq!(m.dense_layers[0].input_size, 4);
        assert_eq!(m.output_layer.input_size, 5);
        assert_eq!(m.output_layer.b_range().end, m.param_count());
    }

    #[test]
    fn forget_bias_starts_at_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = BdLstmModel::new(&spec(), &mut rng).unwrap();
        let cell = m.bdlstm_layers[0].forward_cell;
        let b = &m.params[cell.b_range()];
        assert!(b[..4].iter().all(|&v| v == 1.0));
        assert!(b[4..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn zero_dropout_training_matches_inference() {
        let mut s = spec();
        s.dropout = vec![0.0];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = BdLstmModel::new(&s, &mut rng).unwrap();
        let x: Vec<f64> = (0..15).map(|i| (i as f64 * 0.3).sin()).collect();
        assert_eq!(m.forward(&x, true, &mut rng).unwrap(), m.predict(&x).unwrap());
    }

    #[test]
    fn loss_examples() {
        let m = BdLstmModel::zeros(&spec()).unwrap();
        assert_eq!(m.loss(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(m.loss(&[3.0], &[1.0]).unwrap(), 4.0);
        assert!(m.loss(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn invalid_specs_rejected() {
        let mut s = spec();
        s.dropout = vec![1.0];
        assert!(BdLstmModel::zeros(&s).is_err());
        let mut s = spec();
        s.bdlstm_sizes.clear();
        assert!(BdLstmModel::zeros(&s).is_err());
    }

    #[test]
    fn wrong_sequence_width_rejected() {
        let m = BdLstmModel::zeros(&spec()).unwrap();
        assert!(matches!(m.predict(&[0.0; 7]), Err(Error::Shape(_))));
        assert!(matches!(m.predict(&[]), Err(Error::Shape(_))));
    }
}
