//! Serially dependent heavy-tailed series for the variance-inflation checks.

use rand::distr::Open01;
use rand::Rng;
use rand_distr::{Distribution, Exp1};
use statrs::function::gamma::gamma_li;

use super::stream_rng;
use crate::data::DataMatrix;
use crate::error::{MesError, Result};

fn frechet_draw<R: Rng + ?Sized>(rng: &mut R, alpha: f64) -> f64 {
    let e: f64 = Exp1.sample(rng);
    e.powf(-1.0 / alpha)
}

/// Max-autoregressive series `X_t = max(phi X_(t-1), (1 - phi^alpha)^(1/alpha) Z_t)`
/// with `Z_t` i.i.d. Frechet(alpha). Every `X_t` is exactly Frechet(alpha);
/// the extremal index is `1 - phi^alpha`.
pub fn armax_frechet(n: usize, alpha: f64, phi: f64, seed: u64) -> Result<Vec<f64>> {
    if !(alpha > 0.0) || !(0.0..1.0).contains(&phi) {
        return Err(MesError::InvalidModel(format!("ARMAX needs alpha > 0 and phi in [0, 1), got {alpha}, {phi}")));
    }
    let mut rng = stream_rng(seed, 0);
    let c = (1.0 - phi.powf(alpha)).powf(1.0 / alpha);
    let mut x = frechet_draw(&mut rng, alpha);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        out.push(x);
        x = (phi * x).max(c * frechet_draw(&mut rng, alpha));
    }
    Ok(out)
}

/// Linear AR(1) `X_t = phi X_(t-1) + Z_t` with Pareto(gamma) innovations,
/// after a burn-in of 1000 steps.
pub fn ar1_pareto(n: usize, phi: f64, gamma: f64, seed: u64) -> Result<Vec<f64>> {
    if !(gamma > 0.0) || !(0.0..1.0).contains(&phi) {
        return Err(MesError::InvalidModel(format!("AR(1) needs gamma > 0 and phi in [0, 1), got {gamma}, {phi}")));
    }
    let mut rng = stream_rng(seed, 0);
    let mut x = 0.0;
    let mut out = Vec::with_capacity(n);
    for t in 0..n + 1000 {
        let u: f64 = rng.sample(Open01);
        x = phi * x + u.powf(-gamma);
        if t >= 1000 {
            out.push(x);
        }
    }
    Ok(out)
}

/// Spreads each radius over `d` components with i.i.d. flat Dirichlet
/// weights, so that row sums reproduce `radii` (up to rounding) and
/// `E(X_j | R) = R / d`.
pub fn dirichlet_panel(radii: &[f64], d: usize, seed: u64) -> Result<DataMatrix> {
    if d == 0 {
        return Err(MesError::InvalidInput("dimension must be positive".into()));
    }
    let mut rng = stream_rng(seed, 1);
    let mut values = Vec::with_capacity(radii.len() * d);
    let mut w = vec![0.0; d];
    for &r in radii {
        let mut total = 0.0;
        for x in w.iter_mut() {
            *x = Exp1.sample(&mut rng);
            total += *x;
        }
        values.extend(w.iter().map(|x| r * x / total));
    }
    DataMatrix::new(radii.len(), d, values)
}

/// `E(R | R > Q_R(tau))` for `R` Frechet(alpha), `alpha > 1`:
/// `gamma_lower(1 - 1/alpha, -ln tau) / (1 - tau)`.
pub fn frechet_tail_mean(alpha: f64, tau: f64) -> f64 {
    gamma_li(1.0 - 1.0 / alpha, -tau.ln()) / (1.0 - tau)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::diagnostics::ks_uniform;

    #[test]
    fn armax_margin_is_frechet() {
        let alpha = 3.0;
        let x = armax_frechet(100_000, alpha, 0.7, 11).unwrap();
        let u: Vec<f64> = x.iter().map(|v| (-v.powf(-alpha)).exp()).collect();
        assert!(ks_uniform(&u) < 0.01);
    }

    #[test]
    fn frechet_tail_mean_by_quadrature() {
        // E(X 1{X > q}) = int_0^{-ln tau} y^(-1/alpha) e^(-y) dy, substitute y = s^2
        let (alpha, tau) = (3.0f64, 0.99f64);
        let top = (-tau.ln()).sqrt();
        let steps = 200_000;
        let h = top / steps as f64;
        let f = |s: f64| 2.0 * s * s.powf(-2.0 / alpha) * (-s * s).exp();
        let mut acc = f(top);
        for i in 1..steps {
            acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
        }
        let integral = acc * h / 3.0;
        let expected = integral / (1.0 - tau);
        assert!((frechet_tail_mean(alpha, tau) - expected).abs() / expected < 1e-6);
    }

    #[test]
    fn panel_rows_sum_to_radius() {
        let radii = [1.0, 5.0, 2.5];
        let x = dirichlet_panel(&radii, 3, 2).unwrap();
        for (row, r) in x.rows().zip(radii) {
            assert!((row.iter().sum::<f64>() - r).abs() < 1e-12);
        }
    }
}
