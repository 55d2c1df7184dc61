use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::model::BdLstmModel;
use super::optimizer::OptimizerState;
use crate::error::{Error, Result};

pub const CHECKPOINT_FORMAT: &str = "wavecast-bdlstm/1";

/// Exact position of a ChaCha8 stream.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngState {
    /// 32-byte key, hex encoded.
    pub key: String,
    pub stream: u64,
    /// Word position, decimal (it is a `u128`).
    pub word_pos: String,
}

impl RngState {
    pub fn capture(rng: &ChaCha8Rng) -> Self {
        let key = rng.get_seed().iter().map(|b| format!("{b:02x}")).collect();
        Self {
            key,
            stream: rng.get_stream(),
            word_pos: rng.get_word_pos().to_string(),
        }
    }

    pub fn restore(&self) -> Result<ChaCha8Rng> {
        use rand::SeedableRng;
        if self.key.len() != 64 {
            return Err(Error::Format("rng key must be 64 hex digits".into()));
        }
        let mut key = [0u8; 32];
        for (i, byte) in key.iter_mut().enumerate() {
            *byte = u8::from_str_radix(&self.key[2 * i..2 * i + 2], 16)
                .map_err(|_| Error::Format("rng key is not hex".into()))?;
        }
        let word_pos: u128 = self
            .word_pos
            .parse()
            .map_err(|_| Error::Format("rng word position is not an integer".into()))?;
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(self.stream);
        rng.set_word_pos(word_pos);
        Ok(rng)
    }
}

/// Everything needed to resume training exactly where it stopped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub seed: u64,
    pub epoch: usize,
    pub model: BdLstmModel,
    pub optimizer: OptimizerState,
    pub rng: RngState,
}

impl Checkpoint {
    pub fn new(seed: u64, epoch: usize, model: BdLstmModel, optimizer: OptimizerState, rng: &ChaCha8Rng) -> Self {
        Self {
            format: CHECKPOINT_FORMAT.to_owned(),
            seed,
            epoch,
            model,
            optimizer,
            rng: RngState::capture(rng),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.format != CHECKPOINT_FORMAT {
            return Err(Error::Format(format!("unsupported checkpoint format `{}`", self.format)));
        }
        let expected = self.model.output_layer.b_range().end;
        if self.model.params.len() != expected {
            return Err(Error::Format(format!(
                "checkpoint holds {} parameters, topology needs {expected}",
                self.model.params.len()
            )));
        }
        if self.optimizer.second_moment.len() != expected {
            return Err(Error::Format("optimizer state does not match the model".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn rng_state_round_trip_continues_the_stream() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..37 {
            rng.gen::<u32>();
        }
        let state = RngState::capture(&rng);
        let json = serde_json::to_string(&state).unwrap();
        let mut restored = serde_json::from_str::<RngState>(&json).unwrap().restore().unwrap();
        for _ in 0..100 {
            assert_eq!(rng.gen::<u64>(), restored.gen::<u64>());
        }
    }
}
