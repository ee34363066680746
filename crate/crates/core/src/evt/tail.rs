//! Tail index, extreme quantile and second-order (bias) estimation on radii.

use crate::data::RadialSample;
use crate::error::{MesError, Result};

/// Bounds applied to the second-order shape estimate.
pub const RHO_MIN: f64 = -10.0;
pub const RHO_MAX: f64 = -0.01;

/// Second-order parameters of the radial tail, estimated at level `s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondOrder {
    pub beta: f64,
    pub rho: f64,
    pub s: usize,
}

impl SecondOrder {
    /// A second-order pair with no bias; adjusted estimators reduce to the
    /// plain ones.
    pub fn unbiased(s: usize) -> Self {
        Self { beta: 0.0, rho: -1.0, s }
    }
}

/// Tail fit of the radial component at effective sample size `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailFit {
    pub gamma_hat: f64,
    pub k: usize,
    pub second_order: Option<SecondOrder>,
}

fn check_k_sorted(n: usize, k: usize) -> Result<()> {
    if k == 0 || k + 1 > n {
        return Err(MesError::InvalidK { k, max: n.saturating_sub(1) });
    }
    Ok(())
}

pub(crate) fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau < 1.0 {
        Ok(())
    } else {
        Err(MesError::InvalidTau(tau))
    }
}

/// Hill estimator on an ascending slice, in the weighted log-spacing form
/// `sum_{i<=k} (i/k) ln(X_(n-i+1) / X_(n-i))`.
pub fn hill_sorted(sorted: &[f64], k: usize) -> Result<f64> {
    let n = sorted.len();
    check_k_sorted(n, k)?;
    let threshold = sorted[n - k - 1];
    if !(threshold > 0.0) {
        return Err(MesError::DegenerateTail(format!(
            "order statistic X_(n-k) = {threshold} is not positive at k = {k}"
        )));
    }
    let kf = k as f64;
    let mut upper = sorted[n - 1].ln();
    let mut gamma = 0.0;
    for i in 1..=k {
        let lower = sorted[n - i - 1].ln();
        gamma += (i as f64 / kf) * (upper - lower);
        upper = lower;
    }
    Ok(gamma)
}

/// Hill estimate of the radial tail index from the top `k` radii.
pub fn hill_estimate(r: &RadialSample, k: usize) -> Result<f64> {
    hill_sorted(r.sorted(), k)
}

/// Weissman extrapolation `R_(n-k,n) (n(1-tau)/k)^(-gamma)`.
pub fn weissman_quantile(r: &RadialSample, k: usize, tau: f64, gamma: f64) -> Result<f64> {
    check_tau(tau)?;
    let threshold = r.threshold(k)?;
    if !(threshold > 0.0) {
        return Err(MesError::DegenerateTail(format!(
            "radial threshold {threshold} is not positive at k = {k}"
        )));
    }
    let n = r.n() as f64;
    Ok(threshold * (n * (1.0 - tau) / k as f64).powf(-gamma))
}

/// Default second-order level `floor(n^0.97)`, capped at `n - 2`.
pub fn default_s(n: usize) -> usize {
    ((n as f64).powf(0.97).floor() as usize).min(n.saturating_sub(2))
}

/// Largest admissible second-order level not exceeding [`default_s`] whose
/// threshold radius is positive. Signed data can have many nonpositive radii.
pub fn auto_s(r: &RadialSample) -> usize {
    let positive = r.sorted().iter().filter(|&&v| v > 0.0).count();
    default_s(r.n()).min(positive.saturating_sub(1))
}

/// Moment-ratio estimate of the second-order shape and the matching scale
/// estimate from weighted log-spacings, both at level `s`.
///
/// The shape uses the log-excess moments `M1, M2, M3` through
/// `T = (ln M1 - ln(M2/2)/2) / (ln(M2/2)/2 - ln(M3/6)/3)` and
/// `rho = -|3(T-1)/(T-3)|`, clamped to `[RHO_MIN, RHO_MAX]`.
pub fn second_order_params(r: &RadialSample, s: usize) -> Result<SecondOrder> {
    let sorted = r.sorted();
    let n = sorted.len();
    if s < 3 || s + 1 > n {
        return Err(MesError::InvalidK { k: s, max: n.saturating_sub(1) });
    }
    let threshold = sorted[n - s - 1];
    if !(threshold > 0.0) {
        return Err(MesError::DegenerateTail(format!(
            "second-order threshold {threshold} is not positive at s = {s}"
        )));
    }
    let logs: Vec<f64> = sorted[n - s - 1..].iter().map(|v| v.ln()).collect();
    // logs[s] is ln X_(n), logs[0] is ln X_(n-s)
    let sf = s as f64;
    let (mut m1, mut m2, mut m3) = (0.0, 0.0, 0.0);
    for &l in &logs[1..] {
        let e = l - logs[0];
        m1 += e;
        m2 += e * e;
        m3 += e * e * e;
    }
    m1 /= sf;
    m2 /= sf;
    m3 /= sf;
    if !(m1 > 0.0 && m2 > 0.0 && m3 > 0.0) {
        return Err(MesError::DegenerateTail(
            "log-excesses above the second-order threshold vanish".into(),
        ));
    }
    let half_log_m2 = 0.5 * (m2 / 2.0).ln();
    let t = (m1.ln() - half_log_m2) / (half_log_m2 - (m3 / 6.0).ln() / 3.0);
    let raw = -(3.0 * (t - 1.0) / (t - 3.0)).abs();
    let rho = if raw.is_nan() {
        return Err(MesError::DegenerateTail("second-order shape is undefined".into()));
    } else {
        raw.clamp(RHO_MIN, RHO_MAX)
    };

    // U_i = i (ln X_(n-i+1) - ln X_(n-i)), i = 1..=s
    let spacings: Vec<f64> = (1..=s)
        .map(|i| i as f64 * (logs[s - i + 1] - logs[s - i]))
        .collect();
    let weight_mean = |a: f64| -> f64 {
        (1..=s).map(|i| (i as f64 / sf).powf(-a)).sum::<f64>() / sf
    };
    let weighted = |a: f64| -> f64 {
        spacings
            .iter()
            .enumerate()
            .map(|(idx, u)| ((idx + 1) as f64 / sf).powf(-a) * u)
            .sum::<f64>()
            / sf
    };
    let d_rho = weight_mean(rho);
    let (big_d0, big_d_rho, big_d_2rho) = (weighted(0.0), weighted(rho), weighted(2.0 * rho));
    let beta = (sf / n as f64).powf(rho) * (d_rho * big_d0 - big_d_rho)
        / (d_rho * big_d_rho - big_d_2rho);
    if !beta.is_finite() {
        return Err(MesError::DegenerateTail("second-order scale is not finite".into()));
    }
    Ok(SecondOrder { beta, rho, s })
}

fn check_rho(rho: f64) -> Result<()> {
    if rho < 0.0 {
        Ok(())
    } else {
        Err(MesError::InvalidInput(format!("second-order shape {rho} must be negative")))
    }
}

/// Bias-corrected tail index `gamma (1 - beta (n/k)^rho / (1 - rho))`.
pub fn adjusted_gamma(gamma: f64, beta: f64, rho: f64, n: usize, k: usize) -> Result<f64> {
    check_rho(rho)?;
    check_k_sorted(n, k)?;
    let ratio = n as f64 / k as f64;
    Ok(gamma * (1.0 - beta * ratio.powf(rho) / (1.0 - rho)))
}

/// Log of the multiplicative quantile correction,
/// `beta (n/k)^rho ((k/(n(1-tau)))^rho - 1) / rho`.
pub fn correction_exponent(beta: f64, rho: f64, n: usize, k: usize, tau: f64) -> Result<f64> {
    check_rho(rho)?;
    check_tau(tau)?;
    let (nf, kf) = (n as f64, k as f64);
    Ok(beta * (nf / kf).powf(rho) * ((kf / (nf * (1.0 - tau))).powf(rho) - 1.0) / rho)
}

/// Weissman quantile at `gamma_adj` times `exp(correction_exponent)`.
pub fn adjusted_quantile(
    r: &RadialSample,
    k: usize,
    tau: f64,
    gamma_adj: f64,
    beta: f64,
    rho: f64,
) -> Result<f64> {
    let plain = weissman_quantile(r, k, tau, gamma_adj)?;
    Ok(plain * correction_exponent(beta, rho, r.n(), k, tau)?.exp())
}

/// Hill fit at `k`, with second-order parameters at level `s` when given.
pub fn fit_tail(r: &RadialSample, k: usize, s: Option<usize>) -> Result<TailFit> {
    let gamma_hat = hill_estimate(r, k)?;
    let second_order = s.map(|s| second_order_params(r, s)).transpose()?;
    Ok(TailFit { gamma_hat, k, second_order })
}
