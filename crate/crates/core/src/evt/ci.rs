//! Asymptotic confidence intervals for the MES estimators.
//!
//! Both constructions are log-normal around the point estimate on the
//! extrapolation scale: with `base = n(1-tau)/k < 1`, the bounds are
//! `theta * base^(b + z v / sqrt(k))` and `theta * base^(b - z v / sqrt(k))`.
//! The basic interval uses the Hill bias `b_n` and `v = gamma`; the refined
//! one inflates both for the contribution of the intermediate order
//! statistic. Adjusted estimates are already bias-corrected, so `b = 0`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::mes::{MesEstimate, Variant};
use super::serial::SerialAdjustment;
use super::tail::TailFit;
use crate::error::{MesError, Result};
use crate::special::normal_quantile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CiKind {
    Basic,
    Refined,
}

impl CiKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            CiKind::Basic => "basic",
            CiKind::Refined => "refined",
        }
    }
}

impl fmt::Display for CiKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CiKind {
    type Err = MesError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "basic" => Ok(CiKind::Basic),
            "refined" => Ok(CiKind::Refined),
            other => Err(MesError::Parse(format!("unknown interval kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
    pub alpha: f64,
    pub kind: CiKind,
}

impl Interval {
    pub fn contains(&self, value: f64) -> bool {
        self.lower <= value && value <= self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Exponent shift and scale `(b, v)` of an interval, before `sqrt(inflation)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalTerms {
    pub bias: f64,
    pub scale: f64,
    /// `ln(k / (n(1-tau)))`
    pub log_extrapolation: f64,
}

/// Computes `(b, v)` for the given estimate and interval kind.
pub fn interval_terms(est: &MesEstimate, fit: &TailFit, kind: CiKind) -> Result<IntervalTerms> {
    let gamma = fit.gamma_hat;
    if gamma >= 1.0 || !gamma.is_finite() {
        return Err(MesError::HeavyTailUnbounded { gamma });
    }
    let (n, k) = (est.n as f64, est.k as f64);
    let log_extrapolation = (k / (n * (1.0 - est.tau))).ln();
    if !(log_extrapolation > 0.0) {
        return Err(MesError::InvalidInput(format!(
            "intervals need k > n(1 - tau); got k = {}, n(1 - tau) = {}",
            est.k,
            n * (1.0 - est.tau)
        )));
    }
    let bias = match est.variant {
        Variant::Plain => {
            let so = fit.second_order.ok_or(MesError::MissingSecondOrder)?;
            gamma * so.beta * (n / k).powf(so.rho) / (1.0 - so.rho)
        }
        Variant::Adjusted => 0.0,
        other => {
            return Err(MesError::InvalidInput(format!("no interval for the {other} estimator")))
        }
    };
    // c_n / sqrt(k) = 1 / ln(k / (n(1-tau)))
    let ratio = 1.0 / log_extrapolation;
    let (bias, scale) = match kind {
        CiKind::Basic => (bias, gamma),
        CiKind::Refined => (
            bias * (1.0 + ratio / (1.0 - gamma)),
            gamma * (1.0 + 2.0 * ratio / (1.0 - gamma) + 2.0 * ratio * ratio).sqrt(),
        ),
    };
    Ok(IntervalTerms { bias, scale, log_extrapolation })
}

/// Per-component `(1 - alpha)` intervals for an estimate.
pub fn confidence_interval(
    est: &MesEstimate,
    fit: &TailFit,
    kind: CiKind,
    alpha: f64,
) -> Result<Vec<Interval>> {
    interval_with_inflation(est, fit, kind, alpha, 1.0)
}

/// As [`confidence_interval`], with the scale widened by the serial
/// dependence inflation factor.
pub fn confidence_interval_serial(
    est: &MesEstimate,
    fit: &TailFit,
    kind: CiKind,
    alpha: f64,
    serial: &SerialAdjustment,
) -> Result<Vec<Interval>> {
    interval_with_inflation(est, fit, kind, alpha, serial.inflation)
}

fn interval_with_inflation(
    est: &MesEstimate,
    fit: &TailFit,
    kind: CiKind,
    alpha: f64,
    inflation: f64,
) -> Result<Vec<Interval>> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(MesError::InvalidAlpha(alpha));
    }
    if !(inflation >= 1.0) {
        return Err(MesError::InvalidInput(format!("variance inflation {inflation} below 1")));
    }
    let terms = interval_terms(est, fit, kind)?;
    let z = normal_quantile(1.0 - alpha / 2.0);
    let half = z * terms.scale * inflation.sqrt() / (est.k as f64).sqrt();
    // base^e = exp(-e * ln(k / (n(1-tau))))
    let low_factor = (-(terms.bias + half) * terms.log_extrapolation).exp();
    let high_factor = (-(terms.bias - half) * terms.log_extrapolation).exp();
    Ok(est
        .theta_hat
        .iter()
        .map(|&theta| {
            let (a, b) = (theta * low_factor, theta * high_factor);
            Interval { lower: a.min(b), upper: a.max(b), alpha, kind }
        })
        .collect())
}
