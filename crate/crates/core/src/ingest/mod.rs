//! Raw data readers, frame alignment, scaling, splitting and windowing.

mod frame;
mod scaler;
mod sources;
mod stats;
mod window;

pub use frame::{align, chronological_split, PriceSeries, TimeSeriesFrame, COVID_COLUMN, PRICE_COLUMNS};
pub use scaler::{apply_scaler, fit_scaler, invert_scaler, MinMaxScaler, ScalerParams};
pub use sources::{parse_jhu_cases, parse_ohlcv, CaseSeries, OhlcvParse, RawOhlcvRecord, OHLCV_COLUMNS};
pub use stats::{descriptive_stats, DescriptiveStats};
pub use window::{make_windows, make_windows_with_target, WindowedDataset};
