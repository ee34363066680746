//! Serial extremal dependence of the radius series.
//!
//! Under serial dependence the asymptotic variance of the tail index is
//! `gamma^2 (1 + 2 sum_t r_t(1,1))`, where `r_t(1,1)` is the limiting rate of
//! joint exceedances at lag `t`. It is estimated here by the fraction of
//! exceedances followed by another exceedance `t` steps later, minus the
//! fraction expected when the series is independent.

use serde::Serialize;

use crate::data::RadialSample;
use crate::error::{MesError, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SerialAdjustment {
    /// `r_hat[t - 1]` estimates `r_t(1,1)`; centred, so it can be slightly
    /// negative for independent data.
    pub r_hat: Vec<f64>,
    pub inflation: f64,
    pub lag: usize,
}

impl SerialAdjustment {
    /// No serial dependence: inflation 1.
    pub fn independent() -> Self {
        Self { r_hat: Vec::new(), inflation: 1.0, lag: 0 }
    }
}

/// Default truncation lag `min(floor(sqrt(n)), 50)`.
pub fn default_lag(n: usize) -> usize {
    ((n as f64).sqrt().floor() as usize).min(50)
}

/// `(1/k) #{i : R_i > R_(n-k,n) and R_(i+t) > R_(n-k,n)}`.
pub fn serial_r_hat(r: &RadialSample, k: usize, t: usize) -> Result<f64> {
    let n = r.n();
    if t == 0 || t >= n {
        return Err(MesError::InvalidLag { lag: t, n });
    }
    let threshold = r.threshold(k)?;
    let radii = r.radii();
    let joint = radii
        .iter()
        .zip(&radii[t..])
        .filter(|(a, b)| **a > threshold && **b > threshold)
        .count();
    Ok(joint as f64 / k as f64)
}

/// Expected value of [`serial_r_hat`] when the `m` exceedances fall on
/// uniformly random rows.
fn independent_r_hat(n: usize, m: usize, k: usize, t: usize) -> f64 {
    let (n, m) = (n as f64, m as f64);
    (n - t as f64) * m * (m - 1.0) / (n * (n - 1.0)) / k as f64
}

/// `max(1, 1 + 2 sum_{t <= lag} r_hat_t)` with centred lag estimates.
pub fn variance_inflation(r: &RadialSample, k: usize, lag: usize) -> Result<SerialAdjustment> {
    let m = r.exceedances(k)?.len();
    let n = r.n();
    let lag = lag.min(n - 1);
    let r_hat = (1..=lag)
        .map(|t| Ok(serial_r_hat(r, k, t)? - independent_r_hat(n, m, k, t)))
        .collect::<Result<Vec<_>>>()?;
    let inflation = (1.0 + 2.0 * r_hat.iter().sum::<f64>()).max(1.0);
    Ok(SerialAdjustment { r_hat, inflation, lag })
}
