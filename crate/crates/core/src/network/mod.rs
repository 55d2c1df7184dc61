//! Bidirectional LSTM network with hand-derived backpropagation through time,
//! plus Adam and RMSprop optimizers.
//!
//! Parameters of the whole model are one flat `Vec<f64>`; cells and dense
//! layers are views described by offsets into it. Gradients use the same
//! layout, which keeps optimizers, checkpoints and finite-difference checks
//! independent of the layer structure.

mod cell;
mod checkpoint;
mod dense;
mod layer;
mod model;
mod optimizer;

pub use cell::{lstm_cell_step, LstmCellParams, StepCache, GATES};
pub use checkpoint::{Checkpoint, RngState, CHECKPOINT_FORMAT};
pub use dense::{Activation, DenseLayer};
pub use layer::{bdlstm_forward, BdLstmLayer};
pub use model::{BdLstmModel, ModelSpec};
pub use optimizer::{OptimizerKind, OptimizerState};
