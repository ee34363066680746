//! Radial tail estimators of the marginal expected shortfall, their
//! confidence intervals and the serial-dependence variance adjustment.

pub mod ci;
pub mod mes;
pub mod serial;
pub mod tail;

pub use ci::{confidence_interval, confidence_interval_serial, interval_terms, CiKind, Interval};
pub use mes::{
    adjusted_mes, angular_mean, cai_from_radial, competitor_cai, competitor_emp, emp_from_radial,
    mes_estimate, mes_estimate_adjusted, plain_mes, MesEstimate, Variant,
};
pub use serial::{default_lag, serial_r_hat, variance_inflation, SerialAdjustment};
pub use tail::{
    adjusted_gamma, adjusted_quantile, auto_s, correction_exponent, default_s, fit_tail,
    hill_estimate, hill_sorted, second_order_params, weissman_quantile, SecondOrder, TailFit,
};
