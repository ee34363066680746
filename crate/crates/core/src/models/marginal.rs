//! Heavy-tailed marginal laws, applied through their quantile functions.

use std::fmt;
use std::str::FromStr;

use crate::error::{MesError, Result};
use crate::special::StudentT;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Marginal {
    /// `|T|` for a Student-t law `T`, via the t quantile at `(u + 1)/2`.
    HalfT(StudentT),
    /// `F(x) = 1 - (1 + x^c)^(-k)`.
    Burr { c: f64, k: f64 },
    /// `F(x) = exp(-x^(-alpha))`.
    Frechet { alpha: f64 },
    /// `F(x) = 1 - x^(-1/gamma)` on `x >= 1`.
    Pareto { gamma: f64 },
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(MesError::InvalidModel(format!("{name} must be positive and finite, got {v}")))
    }
}

impl Marginal {
    pub fn half_t(dof: f64) -> Result<Self> {
        Ok(Marginal::HalfT(StudentT::new(positive("half-t degrees of freedom", dof)?)))
    }

    pub fn burr(c: f64, k: f64) -> Result<Self> {
        Ok(Marginal::Burr { c: positive("Burr c", c)?, k: positive("Burr k", k)? })
    }

    pub fn frechet(alpha: f64) -> Result<Self> {
        Ok(Marginal::Frechet { alpha: positive("Frechet alpha", alpha)? })
    }

    pub fn pareto(gamma: f64) -> Result<Self> {
        Ok(Marginal::Pareto { gamma: positive("Pareto gamma", gamma)? })
    }

    /// Extreme-value index of the law.
    pub fn tail_index(&self) -> f64 {
        match *self {
            Marginal::HalfT(t) => 1.0 / t.dof(),
            Marginal::Burr { c, k } => 1.0 / (c * k),
            Marginal::Frechet { alpha } => 1.0 / alpha,
            Marginal::Pareto { gamma } => gamma,
        }
    }

    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(MesError::InvalidInput(format!("quantile level {u} outside (0, 1)")));
        }
        Ok(self.quantile_unchecked(u))
    }

    /// Quantile for `u` already known to lie in `(0, 1)`.
    pub fn quantile_unchecked(&self, u: f64) -> f64 {
        // 1 - u is exact for u >= 1/2, which is where the tail lives
        self.upper_quantile(1.0 - u)
    }

    /// The `x` with `P(X > x) = q`.
    pub fn upper_quantile(&self, q: f64) -> f64 {
        match *self {
            Marginal::HalfT(t) => t.upper_quantile(0.5 * q),
            Marginal::Burr { c, k } => (-q.ln() / k).exp_m1().powf(1.0 / c),
            Marginal::Frechet { alpha } => (-(-q).ln_1p()).powf(-1.0 / alpha),
            Marginal::Pareto { gamma } => q.powf(-gamma),
        }
    }

    /// Distribution function, used by tests and diagnostics.
    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Marginal::HalfT(t) => {
                if x <= 0.0 {
                    0.0
                } else {
                    1.0 - 2.0 * t.sf(x)
                }
            }
            Marginal::Burr { c, k } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-k * x.powf(c).ln_1p()).exp_m1()
                }
            }
            Marginal::Frechet { alpha } => {
                if x <= 0.0 {
                    0.0
                } else {
                    (-x.powf(-alpha)).exp()
                }
            }
            Marginal::Pareto { gamma } => {
                if x <= 1.0 {
                    0.0
                } else {
                    1.0 - x.powf(-1.0 / gamma)
                }
            }
        }
    }
}

impl fmt::Display for Marginal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Marginal::HalfT(t) => write!(f, "halft:{}", t.dof()),
            Marginal::Burr { c, k } => write!(f, "burr:{c},{k}"),
            Marginal::Frechet { alpha } => write!(f, "frechet:{alpha}"),
            Marginal::Pareto { gamma } => write!(f, "pareto:{gamma}"),
        }
    }
}

pub(crate) fn parse_params(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|p| {
            let p = p.trim();
            p.parse::<f64>()
                .ok()
                .or_else(|| p.strip_prefix("sqrt").and_then(|r| r.trim_matches(['(', ')']).parse::<f64>().ok()).map(f64::sqrt))
                .ok_or_else(|| MesError::Parse(format!("bad numeric parameter '{p}'")))
        })
        .collect()
}

/// Parses `halft:2.5`, `burr:2,2`, `burr:sqrt(3),sqrt(3)`, `frechet:5`,
/// `pareto:0.2`. `studenttfolded` is accepted for `halft`.
impl FromStr for Marginal {
    type Err = MesError;

    fn from_str(s: &str) -> Result<Self> {
        let (family, params) = s
            .split_once(':')
            .ok_or_else(|| MesError::Parse(format!("marginal '{s}' lacks parameters")))?;
        let p = parse_params(params)?;
        let arity = |want: usize| {
            if p.len() == want {
                Ok(())
            } else {
                Err(MesError::Parse(format!("marginal '{s}' needs {want} parameter(s)")))
            }
        };
        match family.trim().to_ascii_lowercase().as_str() {
            "halft" | "half-t" | "studenttfolded" => {
                arity(1)?;
                Marginal::half_t(p[0])
            }
            "burr" => {
                arity(2)?;
                Marginal::burr(p[0], p[1])
            }
            "frechet" => {
                arity(1)?;
                Marginal::frechet(p[0])
            }
            "pareto" => {
                arity(1)?;
                Marginal::pareto(p[0])
            }
            other => Err(MesError::Parse(format!("unknown marginal family '{other}'"))),
        }
    }
}
