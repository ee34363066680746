//! Marginal expected shortfall estimators.
//!
//! The proposed estimator combines three pieces fitted on the radial tail:
//! a tail index, an extrapolated radial quantile and the mean direction of
//! the radial exceedances, as `theta_j = Q_R(tau) * w_j / (1 - gamma)`.
//! Two competitors built from the component itself are provided for
//! comparison.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ci::Interval;
use super::tail::{
    adjusted_gamma, adjusted_quantile, auto_s, check_tau, hill_estimate, second_order_params,
    weissman_quantile, SecondOrder,
};
use crate::data::{radial_decompose, DataMatrix, RadialSample};
use crate::error::{MesError, Result};

/// Which estimator produced an estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Plain,
    Adjusted,
    Emp,
    Cai,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Plain, Variant::Adjusted, Variant::Emp, Variant::Cai];

    pub fn as_str(&self) -> &'static str {
        match self {
            Variant::Plain => "plain",
            Variant::Adjusted => "adjusted",
            Variant::Emp => "emp",
            Variant::Cai => "cai",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = MesError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "plain" => Ok(Variant::Plain),
            "adjusted" | "adj" => Ok(Variant::Adjusted),
            "emp" => Ok(Variant::Emp),
            "cai" => Ok(Variant::Cai),
            other => Err(MesError::Parse(format!("unknown estimator '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MesEstimate {
    pub theta_hat: Vec<f64>,
    pub variant: Variant,
    pub tau: f64,
    pub k: usize,
    pub n: usize,
    /// Tail index used in the denominator (bias-corrected for `Adjusted`).
    pub gamma: f64,
    /// Extrapolated radial quantile.
    pub quantile: f64,
    pub ci: Option<Vec<Interval>>,
}

/// Mean direction of the observations whose radius strictly exceeds
/// `R_(n-k,n)`, normalised by `k`.
pub fn angular_mean(r: &RadialSample, k: usize) -> Result<Vec<f64>> {
    let rows = r.exceedances(k)?;
    if rows.is_empty() {
        return Err(MesError::DegenerateThreshold { k });
    }
    let mut w = vec![0.0; r.d()];
    for &i in &rows {
        let dir = r.angular(i).filter(|_| r.radii()[i] > 0.0).ok_or_else(|| {
            MesError::DegenerateTail(format!("exceeding row {i} has nonpositive radius"))
        })?;
        for (acc, v) in w.iter_mut().zip(dir) {
            *acc += v;
        }
    }
    let kf = k as f64;
    w.iter_mut().for_each(|v| *v /= kf);
    Ok(w)
}

fn finite_mean_gamma(gamma: f64) -> Result<f64> {
    if gamma >= 1.0 || !gamma.is_finite() {
        Err(MesError::HeavyTailUnbounded { gamma })
    } else {
        Ok(gamma)
    }
}

fn assemble(
    r: &RadialSample,
    k: usize,
    tau: f64,
    variant: Variant,
    gamma: f64,
    quantile: f64,
) -> Result<MesEstimate> {
    let w = angular_mean(r, k)?;
    let scale = quantile / (1.0 - gamma);
    Ok(MesEstimate {
        theta_hat: w.iter().map(|wj| scale * wj).collect(),
        variant,
        tau,
        k,
        n: r.n(),
        gamma,
        quantile,
        ci: None,
    })
}

/// Plain estimator on an already decomposed sample.
pub fn plain_mes(r: &RadialSample, k: usize, tau: f64) -> Result<MesEstimate> {
    check_tau(tau)?;
    let gamma = finite_mean_gamma(hill_estimate(r, k)?)?;
    let quantile = weissman_quantile(r, k, tau, gamma)?;
    assemble(r, k, tau, Variant::Plain, gamma, quantile)
}

/// Bias-corrected estimator on an already decomposed sample, using the given
/// second-order parameters.
pub fn adjusted_mes(
    r: &RadialSample,
    k: usize,
    tau: f64,
    second_order: &SecondOrder,
) -> Result<MesEstimate> {
    check_tau(tau)?;
    let hill = hill_estimate(r, k)?;
    let SecondOrder { beta, rho, .. } = *second_order;
    let gamma = finite_mean_gamma(adjusted_gamma(hill, beta, rho, r.n(), k)?)?;
    let quantile = adjusted_quantile(r, k, tau, gamma, beta, rho)?;
    assemble(r, k, tau, Variant::Adjusted, gamma, quantile)
}

/// `theta_j(tau) = Q_R(tau) w_j / (1 - gamma)` with Hill and Weissman plug-ins.
pub fn mes_estimate(x: &DataMatrix, k: usize, tau: f64) -> Result<MesEstimate> {
    plain_mes(&radial_decompose(x), k, tau)
}

/// Bias-corrected estimate with second-order parameters fitted at level `s`
/// (or an automatic level when `None`).
pub fn mes_estimate_adjusted(
    x: &DataMatrix,
    k: usize,
    s: Option<usize>,
    tau: f64,
) -> Result<MesEstimate> {
    let r = radial_decompose(x);
    let s = s.unwrap_or_else(|| auto_s(&r));
    let so = second_order_params(&r, s)?;
    adjusted_mes(&r, k, tau, &so)
}

fn check_column(x: &DataMatrix, j: usize) -> Result<()> {
    if j >= x.d() {
        return Err(MesError::InvalidInput(format!("component {j} out of range for d = {}", x.d())));
    }
    Ok(())
}

/// Empirical competitor: the mean of `X_j` over radial exceedances,
/// extrapolated with the radial Hill index.
pub fn emp_from_radial(x: &DataMatrix, r: &RadialSample, j: usize, k: usize, tau: f64) -> Result<f64> {
    check_tau(tau)?;
    check_column(x, j)?;
    let gamma = hill_estimate(r, k)?;
    let rows = r.exceedances(k)?;
    let n = r.n() as f64;
    let kf = k as f64;
    let sum: f64 = rows.iter().map(|&i| x.get(i, j)).sum();
    Ok((kf / (n * (1.0 - tau))).powf(gamma) * sum / kf)
}

/// Rank-based competitor. Ranks are "max" ranks within column `j`:
/// `rank(x) = #{i : X_ij <= x}`.
pub fn cai_from_radial(x: &DataMatrix, r: &RadialSample, j: usize, k: usize, tau: f64) -> Result<f64> {
    check_tau(tau)?;
    check_column(x, j)?;
    let gamma = hill_estimate(r, k)?;
    let rows = r.exceedances(k)?;
    let n = r.n();
    let mut column = x.column(j);
    column.sort_by(f64::total_cmp);
    let threshold = column[n - k - 1];
    let kf = k as f64;
    let sum: f64 = rows
        .iter()
        .map(|&i| {
            let rank = column.partition_point(|v| *v <= x.get(i, j));
            ((n - rank + 1) as f64 / kf).powf(-gamma)
        })
        .sum();
    Ok((kf / (n as f64 * (1.0 - tau))).powf(gamma) * threshold * sum / kf)
}

pub fn competitor_emp(x: &DataMatrix, j: usize, k: usize, tau: f64) -> Result<f64> {
    emp_from_radial(x, &radial_decompose(x), j, k, tau)
}

pub fn competitor_cai(x: &DataMatrix, j: usize, k: usize, tau: f64) -> Result<f64> {
    cai_from_radial(x, &radial_decompose(x), j, k, tau)
}
