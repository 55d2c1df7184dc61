use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Summary statistics in the layout of a descriptive-statistics table.
///
/// `kurtosis` is Pearson's (a normal sample gives about 3, not 0) and
/// `std_dev` uses the `n - 1` divisor; skewness and kurtosis use population
/// central moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DescriptiveStats {
    pub n: usize,
    pub mean: f64,
    pub max: f64,
    pub min: f64,
    pub std_dev: f64,
    pub kurtosis: f64,
    pub skewness: f64,
}

pub fn descriptive_stats(column: &[f64]) -> Result<DescriptiveStats> {
    let n = column.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!(
            "descriptive statistics need at least 2 values, got {n}"
        )));
    }
    let nf = n as f64;
    let (min, max) = column
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    // two passes; the correction term removes most of the rounding in the first mean
    let rough = column.iter().sum::<f64>() / nf;
    let mean = rough + column.iter().map(|x| x - rough).sum::<f64>() / nf;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in column {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    if min == max || m2 <= 0.0 {
        return Err(Error::InsufficientData(
            "zero variance: skewness and kurtosis are undefined".into(),
        ));
    }
    let (c2, c3, c4) = (m2 / nf, m3 / nf, m4 / nf);
    Ok(DescriptiveStats {
        n,
        mean,
        max,
        min,
        std_dev: (m2 / (nf - 1.0)).sqrt(),
        kurtosis: c4 / (c2 * c2),
        skewness: c3 / c2.powf(1.5),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_triple() {
        let s = descriptive_stats(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!((s.mean, s.min, s.max), (2.0, 1.0, 3.0));
        assert!((s.std_dev - 1.0).abs() < 1e-15);
        assert!(s.skewness.abs() < 1e-15);
        // m2 = 2/3, m4 = 2/3 -> kurtosis 1.5
        assert!((s.kurtosis - 1.5).abs() < 1e-14);
    }

    #[test]
    fn constant_and_short_inputs_fail() {
        assert!(descriptive_stats(&[4.0; 10]).is_err());
        assert!(descriptive_stats(&[1.0]).is_err());
        assert!(descriptive_stats(&[]).is_err());
    }
}
