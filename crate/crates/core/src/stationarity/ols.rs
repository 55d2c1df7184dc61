use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    pub coefficients: Vec<f64>,
    pub residuals: Vec<f64>,
    pub std_errors: Vec<f64>,
    /// Residual sum of squares.
    pub rss: f64,
    pub nobs: usize,
}

impl OlsFit {
    pub fn t_ratio(&self, i: usize) -> f64 {
        self.coefficients[i] / self.std_errors[i]
    }

    /// Unbiased residual variance, `rss / (n - k)`.
    pub fn sigma2(&self) -> f64 {
        self.rss / (self.nobs - self.coefficients.len()) as f64
    }
}

/// Least squares through a Householder QR of the design.
///
/// `design` is row-major with `cols` regressors per observation.
pub fn ols(y: &[f64], design: &[f64], cols: usize) -> Result<OlsFit> {
    let rows = y.len();
    if cols == 0 || design.len() != rows * cols {
        return Err(Error::Shape(format!(
            "design of {} values does not fit {rows} x {cols}",
            design.len()
        )));
    }
    if rows <= cols {
        return Err(Error::InsufficientData(format!(
            "{rows} observations for {cols} regressors"
        )));
    }
    let x = DMatrix::from_row_slice(rows, cols, design);
    let qr = x.clone().qr();
    let r = qr.r();
    let scale = r.diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 || r.diagonal().iter().any(|d| d.abs() <= scale * 1e-10) {
        return Err(Error::Singular("design matrix is rank deficient".into()));
    }
    let yv = DVector::from_column_slice(y);
    let qty = qr.q().transpose() * &yv;
    let beta = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| Error::Singular("triangular solve failed".into()))?;
    let residuals = &yv - &x * &beta;
    let rss = residuals.norm_squared();
    let r_inv = r
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Singular("R is not invertible".into()))?;
    let sigma2 = rss / (rows - cols) as f64;
    // diag((R^T R)^-1) = squared row norms of R^-1
    let std_errors = (0..cols)
        .map(|i| (sigma2 * r_inv.row(i).norm_squared()).sqrt())
        .collect();
    Ok(OlsFit {
        coefficients: beta.iter().copied().collect(),
        residuals: residuals.iter().copied().collect(),
        std_errors,
        rss,
        nobs: rows,
    })
}
