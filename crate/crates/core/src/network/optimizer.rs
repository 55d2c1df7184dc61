use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Adam,
    RmsProp,
}

impl FromStr for OptimizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "adam" => Ok(Self::Adam),
            "rmsprop" => Ok(Self::RmsProp),
            other => Err(Error::Config(format!("unknown optimizer `{other}`"))),
        }
    }
}

impl fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Adam => "adam",
            Self::RmsProp => "rmsprop",
        })
    }
}

/// Adam or RMSprop with time-based learning-rate decay
/// `lr / (1 + decay * step)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerState {
    pub kind: OptimizerKind,
    pub learning_rate: f64,
    pub decay: f64,
    pub step: u64,
    /// First moment (Adam only; empty for RMSprop).
    pub first_moment: Vec<f64>,
    /// Second moment / squared-gradient average.
    pub second_moment: Vec<f64>,
    pub beta1: f64,
    pub beta2: f64,
    pub rho: f64,
    pub epsilon: f64,
}

impl OptimizerState {
    pub fn new(kind: OptimizerKind, learning_rate: f64, decay: f64, num_params: usize) -> Self {
        Self {
            kind,
            learning_rate,
            decay,
            step: 0,
            first_moment: match kind {
                OptimizerKind::Adam => vec![0.0; num_params],
                OptimizerKind::RmsProp => Vec::new(),
            },
            second_moment: vec![0.0; num_params],
            beta1: 0.9,
            beta2: 0.999,
            rho: 0.9,
            epsilon: 1e-8,
        }
    }

    /// Learning rate applied by the next update.
    pub fn effective_learning_rate(&self) -> f64 {
        self.learning_rate / (1.0 + self.decay * self.step as f64)
    }

    /// Applies one update. A non-finite gradient aborts the step and leaves
    /// both parameters and state untouched.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        if params.len() != grads.len() || grads.len() != self.second_moment.len() {
            return Err(Error::Shape(format!(
                "{} parameters, {} gradients, optimizer sized for {}",
                params.len(),
                grads.len(),
                self.second_moment.len()
            )));
        }
        if grads.iter().any(|g| !g.is_finite()) {
            return Err(Error::Numeric("non-finite gradient".into()));
        }
        let lr = self.effective_learning_rate();
        self.step += 1;
        match self.kind {
            OptimizerKind::Adam => {
                let t = self.step as i32;
                let c1 = 1.0 - self.beta1.powi(t);
                let c2 = 1.0 - self.beta2.powi(t);
                for (((p, g), m), v) in params
                    .iter_mut()
                    .zip(grads)
                    .zip(&mut self.first_moment)
                    .zip(&mut self.second_moment)
                {
                    *m = self.beta1 * *m + (1.0 - self.beta1) * g;
                    *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
                    let m_hat = *m / c1;
                    let v_hat = *v / c2;
                    *p -= lr * m_hat / (v_hat.sqrt() + self.epsilon);
                }
            }
            OptimizerKind::RmsProp => {
                for ((p, g), v) in params.iter_mut().zip(grads).zip(&mut self.second_moment) {
                    *v = self.rho * *v + (1.0 - self.rho) * g * g;
                    *p -= lr * g / (v.sqrt() + self.epsilon);
                }
            }
        }
        Ok(())
    }
}
