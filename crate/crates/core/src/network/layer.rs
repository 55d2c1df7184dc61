use rand::Rng;
use serde::{Deserialize, Serialize};

use super::cell::{DirectionTrace, LstmCellParams};
use crate::error::{Error, Result};

/// Two LSTM cells reading the sequence in opposite directions. The output at
/// step `t` is the concatenation `[h_forward(t), h_backward(t)]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BdLstmLayer {
    pub forward_cell: LstmCellParams,
    pub backward_cell: LstmCellParams,
    /// Inverted dropout on the layer's outputs while training.
    pub dropout: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct LayerTrace {
    pub forward: DirectionTrace,
    pub backward: DirectionTrace,
    /// Dropout multipliers per output element, `None` when inactive.
    pub mask: Option<Vec<f64>>,
    /// Output `[T x 2H]` after dropout.
    pub output: Vec<f64>,
}

impl BdLstmLayer {
    pub fn hidden_size(&self) -> usize {
        self.forward_cell.hidden_size
    }

    pub fn input_size(&self) -> usize {
        self.forward_cell.input_size
    }

    pub fn output_size(&self) -> usize {
        2 * self.hidden_size()
    }

    pub fn len(&self) -> usize {
        self.forward_cell.len() + self.backward_cell.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub(crate) fn forward_trace<R: Rng>(&self, params: &[f64], inputs: &[f64], dropout_rng: Option<&mut R>) -> LayerTrace {
        let hs = self.hidden_size();
        let steps = inputs.len() / self.input_size();
        let forward = self.forward_cell.scan(params, inputs, false);
        let backward = self.backward_cell.scan(params, inputs, true);
        let mut output = Vec::with_capacity(steps * 2 * hs);
        for t in 0..steps {
            output.extend_from_slice(&forward.h[t * hs..(t + 1) * hs]);
            output.extend_from_slice(&backward.h[t * hs..(t + 1) * hs]);
        }
        let mask = match dropout_rng {
            Some(rng) if self.dropout > 0.0 => {
                let keep = 1.0 - self.dropout;
                let mask: Vec<f64> = (0..output.len())
                    .map(|_| if rng.gen::<f64>() < self.dropout { 0.0 } else { 1.0 / keep })
                    .collect();
                for (o, m) in output.iter_mut().zip(&mask) {
                    *o *= m;
                }
                Some(mask)
            }
            _ => None,
        };
        LayerTrace {
            forward,
            backward,
            mask,
            output,
        }
    }

    /// Backpropagates `d_output` (`[T x 2H]`, gradient w.r.t. the dropped-out
    /// output) and returns the gradient with respect to the layer input.
    pub(crate) fn backward(
        &self,
        params: &[f64],
        inputs: &[f64],
        trace: &LayerTrace,
        d_output: &[f64],
        grads: &mut [f64],
    ) -> Vec<f64> {
        let hs = self.hidden_size();
        let steps = inputs.len() / self.input_size();
        let mut d_fwd = vec![0.0; steps * hs];
        let mut d_bwd = vec![0.0; steps * hs];
        for t in 0..steps {
            let row = &d_output[t * 2 * hs..(t + 1) * 2 * hs];
            let mask = trace.mask.as_ref().map(|m| &m[t * 2 * hs..(t + 1) * 2 * hs]);
            for k in 0..hs {
                let (mf, mb) = mask.map_or((1.0, 1.0), |m| (m[k], m[hs + k]));
                d_fwd[t * hs + k] = row[k] * mf;
                d_bwd[t * hs + k] = row[hs + k] * mb;
            }
        }
        let mut d_inputs = vec![0.0; inputs.len()];
        self.forward_cell
            .scan_backward(params, inputs, &trace.forward, &d_fwd, false, grads, &mut d_inputs);
        self.backward_cell
            .scan_backward(params, inputs, &trace.backward, &d_bwd, true, grads, &mut d_inputs);
        d_inputs
    }
}

/// Runs a bidirectional layer over `sequence` (`[T x input]`) without dropout
/// and returns `[T x 2H]`.
pub fn bdlstm_forward(layer: &BdLstmLayer, params: &[f64], sequence: &[f64]) -> Result<Vec<f64>> {
    let is = layer.input_size();
    if sequence.is_empty() {
        return Err(Error::Shape("empty sequence".into()));
    }
    if is == 0 || sequence.len() % is != 0 {
        return Err(Error::Shape(format!(
            "sequence of {} values is not a whole number of {is}-wide steps",
            sequence.len()
        )));
    }
    if layer.forward_cell.hidden_size != layer.backward_cell.hidden_size
        || layer.forward_cell.input_size != layer.backward_cell.input_size
    {
        return Err(Error::Shape("forward and backward cells differ in shape".into()));
    }
    let end = layer.forward_cell.offset.max(layer.backward_cell.offset)
        + layer.forward_cell.len().max(layer.backward_cell.len());
    if params.len() < end {
        return Err(Error::Shape("parameter vector too short for layer".into()));
    }
    Ok(layer
        .forward_trace::<rand_chacha::ChaCha8Rng>(params, sequence, None)
        .output)
}
