use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gate blocks are stacked in this order in `W`, `U` and `b`:
/// forget, input, output, candidate.
pub const GATES: usize = 4;

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Location of one LSTM cell's tensors inside the model's flat parameter
/// vector: `W` is `[4H x I]`, `U` is `[4H x H]` and `b` is `[4H]`, all
/// row-major, one row block per gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LstmCellParams {
    pub input_size: usize,
    pub hidden_size: usize,
    pub offset: usize,
}

impl LstmCellParams {
    pub fn len(&self) -> usize {
        GATES * self.hidden_size * (self.input_size + self.hidden_size + 1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn w_range(&self) -> Range<usize> {
        let start = self.offset;
        start..start + GATES * self.hidden_size * self.input_size
    }

    pub fn u_range(&self) -> Range<usize> {
        let start = self.w_range().end;
        start..start + GATES * self.hidden_size * self.hidden_size
    }

    pub fn b_range(&self) -> Range<usize> {
        let start = self.u_range().end;
        start..start + GATES * self.hidden_size
    }

    /// Evaluates one step into caller-provided buffers. `gates` receives the
    /// activated gate values `[f, i, o, candidate]`.
    pub(crate) fn step_into(
        &self,
        params: &[f64],
        x: &[f64],
        h_prev: Option<&[f64]>,
        c_prev: Option<&[f64]>,
        gates: &mut [f64],
        c_out: &mut [f64],
        h_out: &mut [f64],
    ) {
        let hs = self.hidden_size;
        let w = &params[self.w_range()];
        let u = &params[self.u_range()];
        let b = &params[self.b_range()];
        for (r, z) in gates.iter_mut().enumerate() {
            let mut acc = b[r];
            let row = &w[r * self.input_size..(r + 1) * self.input_size];
            acc += row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
            if let Some(h) = h_prev {
                let row = &u[r * hs..(r + 1) * hs];
                acc += row.iter().zip(h).map(|(a, b)| a * b).sum::<f64>();
            }
            *z = acc;
        }
        for k in 0..hs {
            let f = sigmoid(gates[k]);
            let i = sigmoid(gates[hs + k]);
            let o = sigmoid(gates[2 * hs + k]);
            let g = gates[3 * hs + k].tanh();
            gates[k] = f;
            gates[hs + k] = i;
            gates[2 * hs + k] = o;
            gates[3 * hs + k] = g;
            let c = f * c_prev.map_or(0.0, |c| c[k]) + i * g;
            c_out[k] = c;
            h_out[k] = o * c.tanh();
        }
    }
}

/// Values kept from one step for the backward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct StepCache {
    pub x: Vec<f64>,
    pub h_prev: Vec<f64>,
    pub c_prev: Vec<f64>,
    /// Activated gates `[f, i, o, candidate]`, each `hidden_size` long.
    pub gates: Vec<f64>,
    pub c: Vec<f64>,
}

/// One LSTM step:
/// `f, i, o = sigmoid(W x + U h_prev + b)` per gate,
/// `C = f * C_prev + i * tanh(W_c x + U_c h_prev + b_c)`, `h = o * tanh(C)`.
pub fn lstm_cell_step(
    cell: &LstmCellParams,
    params: &[f64],
    x: &[f64],
    h_prev: &[f64],
    c_prev: &[f64],
) -> Result<(Vec<f64>, Vec<f64>, StepCache)> {
    let hs = cell.hidden_size;
    if x.len() != cell.input_size || h_prev.len() != hs || c_prev.len() != hs {
        return Err(Error::Shape(format!(
            "cell expects x[{}], h[{hs}], C[{hs}]; got x[{}], h[{}], C[{}]",
            cell.input_size,
            x.len(),
            h_prev.len(),
            c_prev.len()
        )));
    }
    if params.len() < cell.offset + cell.len() {
        return Err(Error::Shape("parameter vector too short for cell".into()));
    }
    let mut gates = vec![0.0; GATES * hs];
    let mut c = vec![0.0; hs];
    let mut h = vec![0.0; hs];
    cell.step_into(params, x, Some(h_prev), Some(c_prev), &mut gates, &mut c, &mut h);
    if h.iter().chain(&c).any(|v| !v.is_finite()) {
        return Err(Error::Numeric("LSTM step produced a non-finite state".into()));
    }
    let cache = StepCache {
        x: x.to_vec(),
        h_prev: h_prev.to_vec(),
        c_prev: c_prev.to_vec(),
        gates,
        c: c.clone(),
    };
    Ok((h, c, cache))
}

/// States of one direction over a whole sequence, indexed by time step
/// (not by processing order).
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct DirectionTrace {
    pub gates: Vec<f64>,
    pub c: Vec<f64>,
    pub h: Vec<f64>,
}

impl LstmCellParams {
    /// Runs the cell over `inputs` (`[T x I]`), from the last step to the
    /// first when `reverse` is set. States start at zero.
    pub(crate) fn scan(&self, params: &[f64], inputs: &[f64], reverse: bool) -> DirectionTrace {
        let (hs, is) = (self.hidden_size, self.input_size);
        let steps = inputs.len() / is;
        let mut trace = DirectionTrace {
            gates: vec![0.0; steps * GATES * hs],
            c: vec![0.0; steps * hs],
            h: vec![0.0; steps * hs],
        };
        let mut h_state = vec![0.0; hs];
        let mut c_state = vec![0.0; hs];
        let mut h_new = vec![0.0; hs];
        let mut c_new = vec![0.0; hs];
        for n in 0..steps {
            let t = if reverse { steps - 1 - n } else { n };
            let x = &inputs[t * is..(t + 1) * is];
            let started = n > 0;
            self.step_into(
                params,
                x,
                started.then_some(h_state.as_slice()),
                started.then_some(c_state.as_slice()),
                &mut trace.gates[t * GATES * hs..(t + 1) * GATES * hs],
                &mut c_new,
                &mut h_new,
            );
            trace.c[t * hs..(t + 1) * hs].copy_from_slice(&c_new);
            trace.h[t * hs..(t + 1) * hs].copy_from_slice(&h_new);
            std::mem::swap(&mut h_state, &mut h_new);
            std::mem::swap(&mut c_state, &mut c_new);
        }
        trace
    }

    /// Backpropagation through time for one direction.
    ///
    /// `d_h` holds the loss gradient with respect to each step's output
    /// `h_t` (`[T x H]`). Parameter gradients are added into `grads` at this
    /// cell's offsets and input gradients into `d_inputs` (`[T x I]`).
    pub(crate) fn scan_backward(
        &self,
        params: &[f64],
        inputs: &[f64],
        trace: &DirectionTrace,
        d_h: &[f64],
        reverse: bool,
        grads: &mut [f64],
        d_inputs: &mut [f64],
    ) {
        let (hs, is) = (self.hidden_size, self.input_size);
        let steps = inputs.len() / is;
        let w = &params[self.w_range()];
        let u = &params[self.u_range()];
        let (w_r, u_r, b_r) = (self.w_range(), self.u_range(), self.b_range());
        let mut dh_next = vec![0.0; hs];
        let mut dc_next = vec![0.0; hs];
        let mut dz = vec![0.0; GATES * hs];
        for n in 0..steps {
            // reverse of the forward processing order
            let t = if reverse { n } else { steps - 1 - n };
            let prev = if reverse {
                (t + 1 < steps).then_some(t + 1)
            } else {
                t.checked_sub(1)
            };
            let g = &trace.gates[t * GATES * hs..(t + 1) * GATES * hs];
            let c = &trace.c[t * hs..(t + 1) * hs];
            for k in 0..hs {
                let (f, i, o, cand) = (g[k], g[hs + k], g[2 * hs + k], g[3 * hs + k]);
                let c_prev = prev.map_or(0.0, |p| trace.c[p * hs + k]);
                let dh = d_h[t * hs + k] + dh_next[k];
                let tc = c[k].tanh();
                let d_o = dh * tc;
                let dc = dc_next[k] + dh * o * (1.0 - tc * tc);
                dz[k] = dc * c_prev * f * (1.0 - f);
                dz[hs + k] = dc * cand * i * (1.0 - i);
                dz[2 * hs + k] = d_o * o * (1.0 - o);
                dz[3 * hs + k] = dc * i * (1.0 - cand * cand);
                dc_next[k] = dc * f;
            }
            let x = &inputs[t * is..(t + 1) * is];
            let dx = &mut d_inputs[t * is..(t + 1) * is];
            {
                let gw = &mut grads[w_r.clone()];
                for (r, &d) in dz.iter().enumerate() {
                    let row = &w[r * is..(r + 1) * is];
                    for ((gv, xv), (wv, dxv)) in gw[r * is..(r + 1) * is]
                        .iter_mut()
                        .zip(x)
                        .zip(row.iter().zip(dx.iter_mut()))
                    {
                        *gv += d * xv;
                        *dxv += d * wv;
                    }
                }
            }
            dh_next.fill(0.0);
            if let Some(p) = prev {
                let h_prev = &trace.h[p * hs..(p + 1) * hs];
                let gu = &mut grads[u_r.clone()];
                for (r, &d) in dz.iter().enumerate() {
                    let row = &u[r * hs..(r + 1) * hs];
                    for ((gv, hv), (uv, dhv)) in gu[r * hs..(r + 1) * hs]
                        .iter_mut()
                        .zip(h_prev)
                        .zip(row.iter().zip(dh_next.iter_mut()))
                    {
                        *gv += d * hv;
                        *dhv += d * uv;
                    }
                }
            }
            for (gb, d) in grads[b_r.clone()].iter_mut().zip(&dz) {
                *gb += d;
            }
        }
    }
}
