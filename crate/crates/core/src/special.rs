//! Student-t distribution and normal quantile.
//!
//! The t survival function goes through the regularized incomplete beta
//! function, with exact closed forms for 1, 2 and 4 degrees of freedom. The
//! quantile is found by Newton iteration on `ln S(t)` against `ln t`, which is
//! close to linear in the tail, safeguarded by bisection on a bracket.

use statrs::function::{beta::beta_reg, erf::erfc_inv, gamma::ln_gamma};

/// Relative tolerance on `t` for the iterative quantile.
pub const QUANTILE_TOL: f64 = 1e-13;

/// Standard normal quantile.
pub fn normal_quantile(p: f64) -> f64 {
    -std::f64::consts::SQRT_2 * erfc_inv(2.0 * p)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Form {
    Cauchy,
    Two,
    Four,
    General,
}

/// Standard Student-t law with `dof` degrees of freedom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudentT {
    dof: f64,
    ln_norm: f64,
    form: Form,
}

impl StudentT {
    /// # Panics
    /// If `dof` is not strictly positive and finite.
    pub fn new(dof: f64) -> Self {
        assert!(dof > 0.0 && dof.is_finite(), "degrees of freedom must be positive");
        let ln_norm = ln_gamma(0.5 * (dof + 1.0))
            - ln_gamma(0.5 * dof)
            - 0.5 * (dof * std::f64::consts::PI).ln();
        let form = if dof == 1.0 {
            Form::Cauchy
        } else if dof == 2.0 {
            Form::Two
        } else if dof == 4.0 {
            Form::Four
        } else {
            Form::General
        };
        Self { dof, ln_norm, form }
    }

    pub fn dof(&self) -> f64 {
        self.dof
    }

    pub fn pdf(&self, t: f64) -> f64 {
        (self.ln_norm - 0.5 * (self.dof + 1.0) * (t * t / self.dof).ln_1p()).exp()
    }

    /// Upper tail probability `P(T > t)`.
    pub fn sf(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 1.0 - self.sf(-t);
        }
        if t.is_infinite() {
            return 0.0;
        }
        let nu = self.dof;
        match self.form {
            Form::Cauchy => {
                if t == 0.0 {
                    0.5
                } else {
                    (1.0 / t).atan() / std::f64::consts::PI
                }
            }
            Form::Two => {
                let g = t / (2.0 + t * t).sqrt();
                let x = 2.0 / (2.0 + t * t);
                0.5 * x / (1.0 + g)
            }
            Form::Four => {
                // I_x(2, 1/2) = x^2 (2 + g) / (2 (1 + g)^2) with g = sqrt(1 - x)
                let s = 4.0 + t * t;
                let x = 4.0 / s;
                let g = t / s.sqrt();
                0.25 * x * x * (2.0 + g) / ((1.0 + g) * (1.0 + g))
            }
            Form::General => {
                let s = nu + t * t;
                if t * t < nu {
                    // x = nu / s is close to 1 here; use the complement
                    0.5 - 0.5 * beta_reg(0.5, 0.5 * nu, t * t / s)
                } else {
                    0.5 * beta_reg(0.5 * nu, 0.5, nu / s)
                }
            }
        }
    }

    pub fn cdf(&self, t: f64) -> f64 {
        if t <= 0.0 {
            self.sf(-t)
        } else {
            1.0 - self.sf(t)
        }
    }

    pub fn quantile(&self, p: f64) -> f64 {
        if p <= 0.0 {
            return f64::NEG_INFINITY;
        }
        if p >= 1.0 {
            return f64::INFINITY;
        }
        if p > 0.5 {
            self.upper_quantile(1.0 - p)
        } else {
            -self.upper_quantile(p)
        }
    }

    /// The `t` with `P(T > t) = q`, for `q` in `(0, 1)`.
    pub fn upper_quantile(&self, q: f64) -> f64 {
        if q <= 0.0 {
            return f64::INFINITY;
        }
        if q >= 1.0 {
            return f64::NEG_INFINITY;
        }
        if q > 0.5 {
            return -self.upper_quantile(1.0 - q);
        }
        if q == 0.5 {
            return 0.0;
        }
        match self.form {
            Form::Cauchy => 1.0 / (std::f64::consts::PI * q).tan(),
            Form::Two => (1.0 - 2.0 * q) / (2.0 * q * (1.0 - q)).sqrt(),
            Form::Four => {
                // 2 sqrt(cos(acos(sqrt a)/3)/sqrt a - 1) with a = 4q(1-q), rewritten
                // through the triple-angle identity to avoid cancellation near q = 1/2
                let theta = (1.0 - 2.0 * q).asin();
                let cos_theta = (4.0 * q * (1.0 - q)).sqrt();
                4.0 * (theta / 3.0).sin() * ((theta / 3.0).cos() / cos_theta).sqrt()
            }
            Form::General => self.solve_upper(q),
        }
    }

    fn initial_guess(&self, q: f64) -> f64 {
        let nu = self.dof;
        if q < 0.05 {
            // S(t) ~ c nu^((nu-1)/2) t^-nu
            let ln_k = self.ln_norm + 0.5 * (nu - 1.0) * nu.ln();
            ((ln_k - q.ln()) / nu).exp()
        } else {
            let z = normal_quantile(1.0 - q);
            (z * (1.0 + (z * z + 1.0) / (4.0 * nu))).max(1e-8)
        }
    }

    fn solve_upper(&self, q: f64) -> f64 {
        let target = q.ln();
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        let mut u = self.initial_guess(q).ln();
        for _ in 0..200 {
            let t = u.exp();
            let s = self.sf(t);
            let h = s.ln() - target;
            if h == 0.0 {
                return t;
            }
            // S is decreasing: S(t) > q means t is too small
            if h > 0.0 {
                lo = u;
            } else {
                hi = u;
            }
            let slope = -t * self.pdf(t) / s;
            let mut next = u - h / slope;
            if !next.is_finite() || next <= lo || next >= hi {
                next = match (lo.is_finite(), hi.is_finite()) {
                    (true, true) => 0.5 * (lo + hi),
                    (true, false) => lo + 1.0,
                    _ => hi - 1.0,
                };
            }
            if (next - u).abs() <= QUANTILE_TOL {
                return next.exp();
            }
            u = next;
        }
        u.exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn normal_quantile_reference_values() {
        assert_relative_eq!(normal_quantile(0.975), 1.959963984540054, epsilon = 1e-12);
        assert_relative_eq!(normal_quantile(0.5), 0.0, epsilon = 1e-15);
        assert_relative_eq!(normal_quantile(0.05), -1.6448536269514722, epsilon = 1e-12);
    }

    #[test]
    fn closed_forms_agree_with_incomplete_beta() {
        for nu in [1.0, 2.0, 4.0] {
            let closed = StudentT::new(nu);
            for &t in &[0.0, 0.3, 1.0, 2.5, 10.0, 250.0] {
                let general = 0.5 * beta_reg(0.5 * nu, 0.5, nu / (nu + t * t));
                assert_relative_eq!(closed.sf(t), general, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn quantile_inverts_sf() {
        for nu in [1.0, 2.0, 2.5, 3.0, 4.0, 5.0, 30.0] {
            let dist = StudentT::new(nu);
            for &q in &[0.49, 0.25, 0.1, 1e-3, 1e-6, 1e-10] {
                let t = dist.upper_quantile(q);
                assert_relative_eq!(dist.sf(t), q, max_relative = 1e-10);
            }
            assert_relative_eq!(dist.quantile(0.3), -dist.quantile(0.7), max_relative = 1e-12);
        }
    }

    #[test]
    fn known_t_quantiles() {
        // t_{0.975} with 5 degrees of freedom
        assert_relative_eq!(StudentT::new(5.0).quantile(0.975), 2.570581835636314, max_relative = 1e-10);
        assert_relative_eq!(StudentT::new(1.0).quantile(0.75), 1.0, max_relative = 1e-12);
    }
}
