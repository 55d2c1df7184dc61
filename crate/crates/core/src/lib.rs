//! Wavelet-decomposed features and a bidirectional LSTM for multi-day price
//! forecasting.
//!
//! The pipeline reads daily closing prices and cumulative case counts
//! ([`ingest`]), checks the series for unit roots ([`stationarity`]),
//! expands each series into stationary wavelet coefficients ([`swt`]), and
//! trains a stacked bidirectional LSTM on sliding windows ([`network`],
//! [`trainer`]).

pub mod error;
pub mod exec;
pub mod ingest;
pub mod network;
pub mod stationarity;
pub mod swt;
pub mod synthetic;
pub mod trainer;

pub use error::{Error, Result};
pub use exec::Execution;
