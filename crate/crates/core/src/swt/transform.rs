use serde::{Deserialize, Serialize};

use super::filters::FilterPair;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Periodic,
}

/// Undecimated decomposition: every vector is as long as the padded input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwtCoefficients {
    pub levels: usize,
    /// Approximation at the deepest level.
    pub approx: Vec<f64>,
    /// Details, finest level first (`details[0]` is level 1).
    pub details: Vec<Vec<f64>>,
    pub original_length: usize,
    pub pad_length: usize,
    pub boundary: Boundary,
}

impl SwtCoefficients {
    pub fn padded_length(&self) -> usize {
        self.original_length + self.pad_length
    }
}

/// Extends `x` periodically until its length is a multiple of `2^levels`.
pub fn pad_periodic(x: &[f64], levels: usize) -> Result<(Vec<f64>, usize)> {
    if x.is_empty() {
        return Err(Error::Precondition("cannot pad an empty signal".into()));
    }
    let block = 1usize << levels;
    let padded_len = x.len().div_ceil(block) * block;
    let padded: Vec<f64> = (0..padded_len).map(|i| x[i % x.len()]).collect();
    Ok((padded, padded_len - x.len()))
}

fn check_levels(len: usize, levels: usize) -> Result<()> {
    if levels == 0 {
        return Err(Error::Precondition("at least one level is required".into()));
    }
    if levels >= usize::BITS as usize || len == 0 || len % (1usize << levels) != 0 {
        return Err(Error::Precondition(format!(
            "signal length {len} is not a positive multiple of 2^{levels}"
        )));
    }
    Ok(())
}

/// Offsets `(center - k) * stride mod n` of every tap at one level.
fn tap_offsets(taps: usize, center: usize, stride: usize, n: usize) -> Vec<usize> {
    (0..taps)
        .map(|k| {
            let shift = (center as i64 - k as i64) * stride as i64;
            shift.rem_euclid(n as i64) as usize
        })
        .collect()
}

fn analysis(x: &[f64], taps: &[f64], offsets: &[usize], out: &mut [f64]) {
    let n = x.len();
    out.fill(0.0);
    for (h, &off) in taps.iter().zip(offsets) {
        for (i, o) in out.iter_mut().enumerate() {
            let j = if i + off >= n { i + off - n } else { i + off };
            *o += h * x[j];
        }
    }
}

fn synthesis(c: &[f64], taps: &[f64], offsets: &[usize], out: &mut [f64]) {
    let n = c.len();
    out.fill(0.0);
    for (h, &off) in taps.iter().zip(offsets) {
        for (i, o) in out.iter_mut().enumerate() {
            let j = if i >= off { i - off } else { i + n - off };
            *o += h * c[j];
        }
    }
}

/// A trous stationary wavelet transform with periodic boundary.
///
/// At level `j` the running approximation is circularly filtered with the
/// level-one filters dilated by `2^(j-1)`; the highpass branch gives the
/// level's detail and the lowpass branch the next approximation. The input
/// length must be a multiple of `2^levels` (see [`pad_periodic`]).
pub fn swt_decompose(x: &[f64], levels: usize, filters: &FilterPair) -> Result<SwtCoefficients> {
    check_levels(x.len(), levels)?;
    if filters.is_empty() {
        return Err(Error::Precondition("empty filter pair".into()));
    }
    let n = x.len();
    let mut approx = x.to_vec();
    let mut next = vec![0.0; n];
    let mut details = Vec::with_capacity(levels);
    for level in 0..levels {
        let offsets = tap_offsets(filters.len(), filters.center(), 1 << level, n);
        let mut detail = vec![0.0; n];
        analysis(&approx, &filters.highpass, &offsets, &mut detail);
        analysis(&approx, &filters.lowpass, &offsets, &mut next);
        std::mem::swap(&mut approx, &mut next);
        details.push(detail);
    }
    Ok(SwtCoefficients {
        levels,
        approx,
        details,
        original_length: n,
        pad_length: 0,
        boundary: Boundary::Periodic,
    })
}

/// Pads `x` periodically, decomposes, and records the pad for the inverse.
pub fn swt_decompose_padded(x: &[f64], levels: usize, filters: &FilterPair) -> Result<SwtCoefficients> {
    let (padded, pad) = pad_periodic(x, levels)?;
    let mut coeffs = swt_decompose(&padded, levels, filters)?;
    coeffs.original_length = x.len();
    coeffs.pad_length = pad;
    Ok(coeffs)
}

/// Inverse of [`swt_decompose`]: applies the adjoint filters level by level
/// (deepest first), halving each sum, then drops the recorded pad.
pub fn iswt_reconstruct(coeffs: &SwtCoefficients, filters: &FilterPair) -> Result<Vec<f64>> {
    let n = coeffs.padded_length();
    if coeffs.details.len() != coeffs.levels
        || coeffs.approx.len() != n
        || coeffs.details.iter().any(|d| d.len() != n)
    {
        return Err(Error::Shape(format!(
            "{} levels with {} detail vectors do not match length {n}",
            coeffs.levels,
            coeffs.details.len()
        )));
    }
    check_levels(n, coeffs.levels)?;
    let mut approx = coeffs.approx.clone();
    let mut low = vec![0.0; n];
    let mut high = vec![0.0; n];
    for level in (0..coeffs.levels).rev() {
        let offsets = tap_offsets(filters.len(), filters.center(), 1 << level, n);
        synthesis(&approx, &filters.lowpass, &offsets, &mut low);
        synthesis(&coeffs.details[level], &filters.highpass, &offsets, &mut high);
        for ((a, l), h) in approx.iter_mut().zip(&low).zip(&high) {
            *a = 0.5 * (l + h);
        }
    }
    approx.truncate(coeffs.original_length);
    Ok(approx)
}
