//! Discrete Meyer filters and the stationary (undecimated) wavelet transform.

mod filters;
mod transform;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use filters::{dmey, meyer_auxiliary, meyer_filters, meyer_wavelet_spectrum, FilterPair};
pub use transform::{
    iswt_reconstruct, pad_periodic, swt_decompose, swt_decompose_padded, Boundary, SwtCoefficients,
};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::ingest::{TimeSeriesFrame, COVID_COLUMN};

pub const DEFAULT_LEVELS: usize = 5;

/// Which coefficients each source column contributes as features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DecompositionMode {
    /// Approximation and details for every column.
    #[serde(rename = "AD")]
    Ad,
    /// Approximation and details for prices, approximation only for case counts.
    #[serde(rename = "ADA")]
    Ada,
}

impl FromStr for DecompositionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "AD" => Ok(Self::Ad),
            "ADA" => Ok(Self::Ada),
            other => Err(Error::Config(format!("unknown decomposition mode `{other}`"))),
        }
    }
}

impl fmt::Display for DecompositionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Ad => "AD",
            Self::Ada => "ADA",
        })
    }
}

/// Coefficient labels in feature order: `cA{levels}, cD1, ..., cD{levels}`.
pub fn coefficient_labels(levels: usize) -> Vec<String> {
    std::iter::once(format!("cA{levels}"))
        .chain((1..=levels).map(|j| format!("cD{j}")))
        .collect()
}

/// Decomposes one column and returns `[cA_J, cD_1, ..., cD_J]`, each trimmed
/// back to the column's length.
pub fn decompose_column(values: &[f64], levels: usize, filters: &FilterPair) -> Result<Vec<Vec<f64>>> {
    let coeffs = swt_decompose_padded(values, levels, filters)?;
    let n = values.len();
    Ok(std::iter::once(&coeffs.approx)
        .chain(&coeffs.details)
        .map(|c| c[..n].to_vec())
        .collect())
}

/// Replaces every column of `frame` by its wavelet coefficients.
///
/// Each source column `x` expands, in order, to `x_cA{J}, x_cD1, ..., x_cD{J}`.
/// In [`DecompositionMode::Ada`] the `covid_cases` column contributes only
/// `covid_cases_cA{J}`.
pub fn decompose_frame(
    frame: &TimeSeriesFrame,
    levels: usize,
    mode: DecompositionMode,
    filters: &FilterPair,
    exec: Execution,
) -> Result<TimeSeriesFrame> {
    let per_column = exec.map(frame.columns(), |col| decompose_column(col, levels, filters));
    let labels = coefficient_labels(levels);
    let mut names = Vec::new();
    let mut columns = Vec::new();
    for (name, coeffs) in frame.names().iter().zip(per_column) {
        let coeffs = coeffs?;
        let approx_only = mode == DecompositionMode::Ada && name == COVID_COLUMN;
        for (label, values) in labels.iter().zip(coeffs) {
            names.push(format!("{name}_{label}"));
            columns.push(values);
            if approx_only {
                break;
            }
        }
    }
    frame.with_columns(names, columns)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_for_five_levels() {
        assert_eq!(coefficient_labels(5), ["cA5", "cD1", "cD2", "cD3", "cD4", "cD5"]);
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("ada".parse::<DecompositionMode>().unwrap(), DecompositionMode::Ada);
        assert!("ADX".parse::<DecompositionMode>().is_err());
    }
}
