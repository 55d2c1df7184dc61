//! Unit-root diagnostics: augmented Dickey-Fuller and Phillips-Perron tests
//! at level and first difference.

mod ols;
mod unit_root;

pub use ols::{ols, OlsFit};
pub use unit_root::{
    adf_test, bartlett_weights, critical_values, difference, long_run_variance, newey_west_bandwidth, pp_test, run,
    Bandwidth, CriticalValue, Deterministic, TestKind, Transform, UnitRootResult, UnitRootSpec, ASYMPTOTIC_BELOW,
    CRITICAL_INTERCEPT, CRITICAL_TREND_AND_INTERCEPT, LEVELS,
};
