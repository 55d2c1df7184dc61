use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Analysis filters of a two-channel orthonormal filter bank.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterPair {
    pub name: String,
    pub lowpass: Vec<f64>,
    pub highpass: Vec<f64>,
}

impl FilterPair {
    /// Builds the pair from a lowpass filter using
    /// `highpass[k] = (-1)^k lowpass[L-1-k]`.
    pub fn from_lowpass(name: impl Into<String>, lowpass: Vec<f64>) -> Self {
        let len = lowpass.len();
        let highpass = (0..len)
            .map(|k| if k % 2 == 0 { 1.0 } else { -1.0 } * lowpass[len - 1 - k])
            .collect();
        Self {
            name: name.into(),
            lowpass,
            highpass,
        }
    }

    pub fn haar() -> Self {
        Self::from_lowpass("haar", vec![FRAC_1_SQRT_2, FRAC_1_SQRT_2])
    }

    pub fn len(&self) -> usize {
        self.lowpass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lowpass.is_empty()
    }

    /// Tap treated as time zero when filtering, so coefficients line up with
    /// the samples they describe.
    pub fn center(&self) -> usize {
        self.lowpass.len() / 2
    }

    /// Largest violation of `sum |H(w)|^2 + |H(w + pi)|^2 = 2`, measured through
    /// the even-shift autocorrelation of the lowpass taps.
    pub fn orthonormality_defect(&self) -> f64 {
        orthonormality_residual(&self.lowpass)
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Smooth transition polynomial `a^4 (35 - 84a + 70a^2 - 20a^3)`, clamped to
/// 0 below the interval `[0, 1]` and 1 above it.
pub fn meyer_auxiliary(a: f64) -> f64 {
    if a <= 0.0 {
        0.0
    } else if a >= 1.0 {
        1.0
    } else {
        a.powi(4) * (35.0 - 84.0 * a + 70.0 * a * a - 20.0 * a.powi(3))
    }
}

/// Magnitude of the Meyer scaling function's spectrum.
fn scaling_spectrum(omega: f64) -> f64 {
    let w = omega.abs();
    if w <= 2.0 * PI / 3.0 {
        1.0
    } else if w <= 4.0 * PI / 3.0 {
        (PI / 2.0 * meyer_auxiliary(3.0 * w / (2.0 * PI) - 1.0)).cos()
    } else {
        0.0
    }
}

/// Meyer wavelet magnitude spectrum, zero outside `2pi/3 < |w| < 8pi/3`.
pub fn meyer_wavelet_spectrum(omega: f64) -> f64 {
    let w = omega.abs();
    let norm = 1.0 / (2.0 * PI).sqrt();
    if w > 2.0 * PI / 3.0 && w <= 4.0 * PI / 3.0 {
        norm * (PI / 2.0 * meyer_auxiliary(3.0 * w / (2.0 * PI) - 1.0)).sin()
    } else if w > 4.0 * PI / 3.0 && w < 8.0 * PI / 3.0 {
        norm * (PI / 2.0 * meyer_auxiliary(3.0 * w / (4.0 * PI) - 1.0)).cos()
    } else {
        0.0
    }
}

fn orthonormality_residual(h: &[f64]) -> Vec<f64> {
    let len = h.len();
    let mut out: Vec<f64> = (0..len / 2)
        .map(|m| {
            let dot: f64 = h[..len - 2 * m].iter().zip(&h[2 * m..]).map(|(a, b)| a * b).sum();
            if m == 0 {
                dot - 1.0
            } else {
                dot
            }
        })
        .collect();
    // H(pi) = 0
    out.push(h.iter().enumerate().map(|(k, v)| if k % 2 == 0 { *v } else { -*v }).sum());
    out
}

fn orthonormality_jacobian(h: &[f64]) -> DMatrix<f64> {
    let len = h.len();
    let rows = len / 2 + 1;
    let mut jac = DMatrix::zeros(rows, len);
    for m in 0..len / 2 {
        for j in 0..len {
            let mut d = 0.0;
            if j + 2 * m < len {
                d += h[j + 2 * m];
            }
            if j >= 2 * m {
                d += h[j - 2 * m];
            }
            jac[(m, j)] = d;
        }
    }
    for j in 0..len {
        jac[(rows - 1, j)] = if j % 2 == 0 { 1.0 } else { -1.0 };
    }
    jac
}

/// Moves `h` to a nearby filter with orthonormal even shifts and a zero at
/// `pi`, using minimum-norm Gauss-Newton steps.
fn project_orthonormal(mut h: Vec<f64>) -> Result<Vec<f64>> {
    const TOL: f64 = 1e-15;
    let mut defect = f64::INFINITY;
    for _ in 0..200 {
        let residual = orthonormality_residual(&h);
        defect = residual.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if defect < TOL {
            return Ok(h);
        }
        // minimum-norm solution of J d = -r via QR of J^T
        let qr = orthonormality_jacobian(&h).transpose().qr();
        let r = qr.r();
        let rhs = -DVector::from_vec(residual);
        let z = r
            .transpose()
            .solve_lower_triangular(&rhs)
            .ok_or_else(|| Error::Singular("orthonormality constraints are degenerate".into()))?;
        let step = qr.q() * z;
        for (v, d) in h.iter_mut().zip(step.iter()) {
            *v += d;
        }
    }
    if defect < 1e-13 {
        Ok(h)
    } else {
        Err(Error::Numeric(format!(
            "orthonormal projection stalled at defect {defect:e}"
        )))
    }
}

/// Discrete Meyer filter pair synthesised from the Meyer scaling spectrum.
///
/// The lowpass response `sqrt(2) * phi(2w)` is sampled on `grid_size` points of
/// `[-pi, pi)`, inverse transformed, and the `num_taps` samples around time zero
/// are kept (tap `num_taps / 2` is time zero). Truncation leaves the taps
/// slightly off an orthonormal filter bank, so they are then projected onto the
/// nearest orthonormal filter, which makes the undecimated transform invertible
/// to rounding error. The sum is renormalised to `sqrt(2)` at the end.
pub fn meyer_filters(num_taps: usize, grid_size: usize) -> Result<FilterPair> {
    if num_taps < 2 || num_taps % 2 != 0 {
        return Err(Error::Precondition(format!(
            "tap count must be even and positive, got {num_taps}"
        )));
    }
    if grid_size < 4096 || !grid_size.is_power_of_two() {
        return Err(Error::Precondition(format!(
            "frequency grid of {grid_size} points cannot resolve the Meyer transition bands \
             (need a power of two >= 4096)"
        )));
    }
    if num_taps * 8 > grid_size {
        return Err(Error::Precondition(format!(
            "frequency grid of {grid_size} points is too coarse for {num_taps} taps"
        )));
    }
    let spectrum: Vec<(f64, f64)> = (0..grid_size)
        .map(|m| {
            let omega = -PI + 2.0 * PI * m as f64 / grid_size as f64;
            (omega, SQRT_2 * scaling_spectrum(2.0 * omega))
        })
        .filter(|(_, amp)| *amp != 0.0)
        .collect();
    let center = (num_taps / 2) as f64;
    let taps: Vec<f64> = (0..num_taps)
        .map(|k| {
            let t = k as f64 - center;
            spectrum.iter().map(|(w, amp)| amp * (w * t).cos()).sum::<f64>() / grid_size as f64
        })
        .collect();
    let mut taps = project_orthonormal(taps)?;
    let sum: f64 = taps.iter().sum();
    for v in &mut taps {
        *v *= SQRT_2 / sum;
    }
    Ok(FilterPair::from_lowpass("dmey", taps))
}

/// The 62-tap discrete Meyer pair on an 8192-point grid.
pub fn dmey() -> Result<FilterPair> {
    meyer_filters(62, 8192)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn auxiliary_endpoints_and_symmetry() {
        assert_eq!(meyer_auxiliary(0.0), 0.0);
        assert_eq!(meyer_auxiliary(1.0), 1.0);
        for i in 0..=1000 {
            let a = i as f64 / 1000.0;
            assert!((meyer_auxiliary(a) + meyer_auxiliary(1.0 - a) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn haar_invariants() {
        let haar = FilterPair::haar();
        assert_eq!(haar.highpass, vec![FRAC_1_SQRT_2, -FRAC_1_SQRT_2]);
        assert!(haar.orthonormality_defect() < 1e-15);
    }

    #[test]
    fn dmey_invariants() {
        let f = dmey().unwrap();
        assert_eq!(f.len(), 62);
        let sum_lo: f64 = f.lowpass.iter().sum();
        let sum_hi: f64 = f.highpass.iter().sum();
        let norm: f64 = f.lowpass.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((sum_lo - SQRT_2).abs() < 1e-6);
        assert!(sum_hi.abs() < 1e-6);
        assert!((norm - 1.0).abs() < 1e-6);
        assert!(f.orthonormality_defect() < 1e-12);
        let len = f.len();
        for k in 0..len {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            assert_eq!(f.highpass[k], sign * f.lowpass[len - 1 - k]);
        }
    }

    #[test]
    fn coarse_grid_rejected() {
        assert!(matches!(meyer_filters(62, 2048), Err(Error::Precondition(_))));
        assert!(matches!(meyer_filters(62, 5000), Err(Error::Precondition(_))));
        assert!(matches!(meyer_filters(61, 8192), Err(Error::Precondition(_))));
    }

    #[test]
    fn wavelet_spectrum_support() {
        assert_eq!(meyer_wavelet_spectrum(0.5), 0.0);
        assert_eq!(meyer_wavelet_spectrum(3.0 * PI), 0.0);
        assert!(meyer_wavelet_spectrum(PI) > 0.0);
    }
}
