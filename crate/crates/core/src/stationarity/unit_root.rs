use serde::{Deserialize, Serialize};

use super::ols::{ols, OlsFit};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestKind {
    Adf,
    Pp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Deterministic {
    Intercept,
    TrendAndIntercept,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    Level,
    FirstDifference,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bandwidth {
    NeweyWest,
    Fixed(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitRootSpec {
    pub test: TestKind,
    pub deterministic: Deterministic,
    pub transform: Transform,
    pub max_lags: usize,
    pub bandwidth: Bandwidth,
}

impl UnitRootSpec {
    pub fn adf(deterministic: Deterministic) -> Self {
        Self {
            test: TestKind::Adf,
            deterministic,
            transform: Transform::Level,
            max_lags: 31,
            bandwidth: Bandwidth::NeweyWest,
        }
    }

    pub fn pp(deterministic: Deterministic) -> Self {
        Self {
            test: TestKind::Pp,
            ..Self::adf(deterministic)
        }
    }

    pub fn with_transform(self, transform: Transform) -> Self {
        Self { transform, ..self }
    }
}

/// Significance levels reported for every test.
pub const LEVELS: [&str; 3] = ["1%", "5%", "10%"];

pub const CRITICAL_INTERCEPT: [f64; 3] = [-3.431479, -2.861924, -2.567017];
pub const CRITICAL_TREND_AND_INTERCEPT: [f64; 3] = [-3.959877, -3.410705, -3.127138];

/// Samples shorter than this are tested against the large-sample table anyway
/// and flagged as asymptotic.
pub const ASYMPTOTIC_BELOW: usize = 500;

pub fn critical_values(deterministic: Deterministic) -> [f64; 3] {
    match deterministic {
        Deterministic::Intercept => CRITICAL_INTERCEPT,
        Deterministic::TrendAndIntercept => CRITICAL_TREND_AND_INTERCEPT,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalValue {
    pub level: String,
    pub value: f64,
    pub reject: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitRootResult {
    pub test: TestKind,
    pub statistic: f64,
    /// Selected ADF lag order, or the PP kernel bandwidth.
    pub lags_or_bandwidth: usize,
    pub nobs: usize,
    pub critical_values: Vec<CriticalValue>,
    pub asymptotic: bool,
}

impl UnitRootResult {
    fn new(test: TestKind, statistic: f64, lags: usize, nobs: usize, series_len: usize, det: Deterministic) -> Self {
        let critical_values = LEVELS
            .iter()
            .zip(critical_values(det))
            .map(|(level, value)| CriticalValue {
                level: (*level).to_owned(),
                value,
                reject: statistic < value,
            })
            .collect();
        Self {
            test,
            statistic,
            lags_or_bandwidth: lags,
            nobs,
            critical_values,
            asymptotic: series_len < ASYMPTOTIC_BELOW,
        }
    }

    pub fn reject_at(&self, level: &str) -> Option<bool> {
        self.critical_values.iter().find(|c| c.level == level).map(|c| c.reject)
    }

    /// Table-style cell: statistic followed by the lag or bandwidth in parentheses.
    pub fn display(&self) -> String {
        format!("{:.4} ({})", self.statistic, self.lags_or_bandwidth)
    }
}

pub fn difference(series: &[f64]) -> Result<Vec<f64>> {
    if series.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "differencing needs at least 2 values, got {}",
            series.len()
        )));
    }
    Ok(series.windows(2).map(|w| w[1] - w[0]).collect())
}

fn prepare(series: &[f64], transform: Transform) -> Result<Vec<f64>> {
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::Data("series contains non-finite values".into()));
    }
    match transform {
        Transform::Level => Ok(series.to_vec()),
        Transform::FirstDifference => difference(series),
    }
}

/// Dickey-Fuller regression of `dy[t]` on deterministics, `y[t]` and `lags`
/// lagged differences, over `t in first..dy.len()`. Column 0 of the design
/// (after deterministics) is the lagged level.
fn df_regression(y: &[f64], dy: &[f64], det: Deterministic, lags: usize, first: usize) -> Result<(OlsFit, usize)> {
    let n_det = match det {
        Deterministic::Intercept => 1,
        Deterministic::TrendAndIntercept => 2,
    };
    let cols = n_det + 1 + lags;
    let rows = dy.len() - first;
    let mut design = Vec::with_capacity(rows * cols);
    let mut target = Vec::with_capacity(rows);
    for t in first..dy.len() {
        design.push(1.0);
        if n_det == 2 {
            design.push((t + 1) as f64);
        }
        design.push(y[t]);
        for i in 1..=lags {
            design.push(dy[t - i]);
        }
        target.push(dy[t]);
    }
    Ok((ols(&target, &design, cols)?, n_det))
}

fn schwarz(fit: &OlsFit) -> f64 {
    let t = fit.nobs as f64;
    let k = fit.coefficients.len() as f64;
    (fit.rss / t).ln() + k * t.ln() / t
}

/// Augmented Dickey-Fuller test with Schwarz lag selection.
///
/// Every lag order up to `max_lags` is fitted on the same rows (those usable at
/// `max_lags`); the chosen order is then refitted on all rows it can use.
pub fn adf_test(series: &[f64], spec: &UnitRootSpec) -> Result<UnitRootResult> {
    let y = prepare(series, spec.transform)?;
    let n_det = if spec.deterministic == Deterministic::Intercept { 1 } else { 2 };
    let needed = spec.max_lags + n_det + 1 + spec.max_lags + 2;
    if y.len() < needed.max(4) {
        return Err(Error::InsufficientData(format!(
            "ADF with max lag {} needs at least {needed} observations, got {}",
            spec.max_lags,
            y.len()
        )));
    }
    let dy = difference(&y)?;
    let mut best: Option<(f64, usize)> = None;
    for p in 0..=spec.max_lags {
        let (fit, _) = df_regression(&y, &dy, spec.deterministic, p, spec.max_lags)?;
        let sic = schwarz(&fit);
        if !sic.is_finite() {
            continue;
        }
        if best.map_or(true, |(b, _)| sic < b) {
            best = Some((sic, p));
        }
    }
    let (_, lags) = best.ok_or_else(|| Error::Numeric("no finite information criterion".into()))?;
    let (fit, n_det) = df_regression(&y, &dy, spec.deterministic, lags, lags)?;
    let stat = fit.t_ratio(n_det);
    if !stat.is_finite() {
        return Err(Error::Numeric("ADF statistic is not finite".into()));
    }
    Ok(UnitRootResult::new(TestKind::Adf, stat, lags, fit.nobs, y.len(), spec.deterministic))
}

pub fn bartlett_weights(bandwidth: usize) -> Vec<f64> {
    let q = bandwidth as f64;
    (1..=bandwidth).map(|j| 1.0 - j as f64 / (q + 1.0)).collect()
}

/// `floor(4 (T/100)^(2/9))`
pub fn newey_west_bandwidth(nobs: usize) -> usize {
    (4.0 * (nobs as f64 / 100.0).powf(2.0 / 9.0)).floor() as usize
}

/// Bartlett-weighted long-run variance of `u` with `1/T` autocovariances.
pub fn long_run_variance(u: &[f64], bandwidth: usize) -> f64 {
    let t = u.len() as f64;
    let autocov = |j: usize| u[j..].iter().zip(u).map(|(a, b)| a * b).sum::<f64>() / t;
    let weights = bartlett_weights(bandwidth);
    autocov(0)
        + 2.0
            * weights
                .iter()
                .enumerate()
                .map(|(i, w)| w * autocov(i + 1))
                .sum::<f64>()
}

/// Phillips-Perron Z(t) test: the lag-free Dickey-Fuller t-ratio corrected by
/// the Bartlett long-run variance of its residuals.
pub fn pp_test(series: &[f64], spec: &UnitRootSpec) -> Result<UnitRootResult> {
    let y = prepare(series, spec.transform)?;
    if y.len() < 20 {
        return Err(Error::InsufficientData(format!(
            "Phillips-Perron needs at least 20 observations, got {}",
            y.len()
        )));
    }
    let dy = difference(&y)?;
    let (fit, n_det) = df_regression(&y, &dy, spec.deterministic, 0, 0)?;
    let nobs = fit.nobs;
    let bandwidth = match spec.bandwidth {
        Bandwidth::NeweyWest => newey_west_bandwidth(nobs),
        Bandwidth::Fixed(q) => q,
    };
    if bandwidth >= nobs {
        return Err(Error::InsufficientData(format!(
            "bandwidth {bandwidth} not below {nobs} observations"
        )));
    }
    let t_stat = fit.t_ratio(n_det);
    let se = fit.std_errors[n_det];
    let gamma0 = fit.rss / nobs as f64;
    let lambda2 = long_run_variance(&fit.residuals, bandwidth);
    if !(lambda2 > 0.0) {
        return Err(Error::Numeric("non-positive long-run variance".into()));
    }
    let s = fit.sigma2().sqrt();
    let stat = (gamma0 / lambda2).sqrt() * t_stat
        - (lambda2 - gamma0) / (2.0 * lambda2.sqrt()) * (nobs as f64 * se / s);
    if !stat.is_finite() {
        return Err(Error::Numeric("PP statistic is not finite".into()));
    }
    Ok(UnitRootResult::new(TestKind::Pp, stat, bandwidth, nobs, y.len(), spec.deterministic))
}

pub fn run(series: &[f64], spec: &UnitRootSpec) -> Result<UnitRootResult> {
    match spec.test {
        TestKind::Adf => adf_test(series, spec),
        TestKind::Pp => pp_test(series, spec),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn differences() {
        assert_eq!(difference(&[1.0, 1.0, 1.0]).unwrap(), vec![0.0, 0.0]);
        assert_eq!(difference(&[1.0, 3.0, 6.0]).unwrap(), vec![2.0, 3.0]);
        assert!(difference(&[1.0]).is_err());
    }

    #[test]
    fn bartlett_weights_q3() {
        assert_eq!(bartlett_weights(3), vec![0.75, 0.5, 0.25]);
        assert!(bartlett_weights(0).is_empty());
    }

    #[test]
    fn critical_values_are_the_published_ones() {
        assert_eq!(critical_values(Deterministic::Intercept), [-3.431479, -2.861924, -2.567017]);
        assert_eq!(
            critical_values(Deterministic::TrendAndIntercept),
            [-3.959877, -3.410705, -3.127138]
        );
    }

    #[test]
    fn newey_west_rule() {
        assert_eq!(newey_west_bandwidth(100), 4);
        assert_eq!(newey_west_bandwidth(1999), 7);
    }

    #[test]
    fn short_series_rejected() {
        let x: Vec<f64> = (0..15).map(|i| (i as f64).sin()).collect();
        assert!(pp_test(&x, &UnitRootSpec::pp(Deterministic::Intercept)).is_err());
        assert!(adf_test(&x, &UnitRootSpec::adf(Deterministic::Intercept)).is_err());
    }
}
