use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Elu,
    Tanh,
    Identity,
}

impl Activation {
    pub const ALL: [Activation; 4] = [Activation::Relu, Activation::Elu, Activation::Tanh, Activation::Identity];

    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Elu => {
                if z > 0.0 {
                    z
                } else {
                    z.exp_m1()
                }
            }
            Activation::Tanh => z.tanh(),
            Activation::Identity => z,
        }
    }

    /// Derivative with respect to the pre-activation `z`.
    pub fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Elu => {
                if z > 0.0 {
                    1.0
                } else {
                    z.exp()
                }
            }
            Activation::Tanh => {
                let t = z.tanh();
                1.0 - t * t
            }
            Activation::Identity => 1.0,
        }
    }
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "relu" => Ok(Activation::Relu),
            "elu" => Ok(Activation::Elu),
            "tanh" => Ok(Activation::Tanh),
            "identity" | "linear" => Ok(Activation::Identity),
            other => Err(Error::Config(format!("unknown activation `{other}`"))),
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Activation::Relu => "relu",
            Activation::Elu => "elu",
            Activation::Tanh => "tanh",
            Activation::Identity => "identity",
        })
    }
}

/// Fully connected layer `act(W x + b)`; `W` is `[out x in]` row-major,
/// followed by `b`, starting at `offset` in the flat parameter vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DenseLayer {
    pub input_size: usize,
    pub output_size: usize,
    pub activation: Activation,
    pub offset: usize,
}

impl DenseLayer {
    pub fn len(&self) -> usize {
        self.output_size * (self.input_size + 1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn w_range(&self) -> Range<usize> {
        self.offset..self.offset + self.output_size * self.input_size
    }

    pub fn b_range(&self) -> Range<usize> {
        let start = self.w_range().end;
        start..start + self.output_size
    }

    /// Returns `(pre_activation, output)`.
    pub(crate) fn forward(&self, params: &[f64], x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let w = &params[self.w_range()];
        let b = &params[self.b_range()];
        let z: Vec<f64> = w
            .chunks_exact(self.input_size)
            .zip(b)
            .map(|(row, bias)| bias + row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>())
            .collect();
        let a = z.iter().map(|&v| self.activation.apply(v)).collect();
        (z, a)
    }

    /// Accumulates parameter gradients and returns the gradient with respect to `x`.
    pub(crate) fn backward(&self, params: &[f64], x: &[f64], z: &[f64], d_out: &[f64], grads: &mut [f64]) -> Vec<f64> {
        let dz: Vec<f64> = z
            .iter()
            .zip(d_out)
            .map(|(&zv, &d)| d * self.activation.derivative(zv))
            .collect();
        let w = &params[self.w_range()];
        let mut dx = vec![0.0; self.input_size];
        {
            let gw = &mut grads[self.w_range()];
            for (r, &d) in dz.iter().enumerate() {
                let row = &w[r * self.input_size..(r + 1) * self.input_size];
                for ((g, xv), (wv, dxv)) in gw[r * self.input_size..(r + 1) * self.input_size]
                    .iter_mut()
                    .zip(x)
                    .zip(row.iter().zip(dx.iter_mut()))
                {
                    *g += d * xv;
                    *dxv += d * wv;
                }
            }
        }
        for (g, d) in grads[self.b_range()].iter_mut().zip(&dz) {
            *g += d;
        }
        dx
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn activation_derivatives_match_differences() {
        for act in Activation::ALL {
            for &z in &[-1.3, -0.2, 0.4, 2.0] {
                let h = 1e-6;
                let fd = (act.apply(z + h) - act.apply(z - h)) / (2.0 * h);
                assert!((fd - act.derivative(z)).abs() < 1e-8, "{act} at {z}");
            }
        }
    }

    #[test]
    fn parse_round_trip() {
        for act in Activation::ALL {
            assert_eq!(act.to_string().parse::<Activation>().unwrap(), act);
        }
        assert!("softmax".parse::<Activation>().is_err());
    }
}
