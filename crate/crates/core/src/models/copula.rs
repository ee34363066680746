//! Copula samplers.
//!
//! The Archimedean families are drawn by frailty mixing (Marshall-Olkin):
//! with a positive latent `V` whose Laplace transform is the generator inverse
//! `psi`, and i.i.d. unit exponentials `E_j`, `U_j = psi(E_j / V)`.
//!
//! * Clayton: `V ~ Gamma(1/delta, 1)`, `psi(t) = (1 + t)^(-1/delta)`.
//! * Gumbel: `V` positive stable with index `1/theta`, `psi(t) = exp(-t^(1/theta))`.
//! * Joe: `V ~ Sibuya(1/theta)`, `psi(t) = 1 - (1 - e^(-t))^(1/theta)`.
//!
//! The Student-t copula pushes a correlated multivariate t vector through the
//! univariate t distribution function.

use std::f64::consts::PI;

use rand::distr::Open01;
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, Exp1, Gamma, StandardNormal};
use statrs::function::gamma::ln_gamma;

use super::marginal::parse_params;
use crate::error::{MesError, Result};
use crate::special::StudentT;

#[derive(Debug, Clone)]
pub enum Copula {
    Clayton { delta: f64, frailty: Gamma<f64> },
    Gumbel { theta: f64 },
    Joe { theta: f64 },
    StudentT(TCopula),
}

#[derive(Debug, Clone)]
pub struct TCopula {
    d: usize,
    dof: f64,
    correlation: Vec<f64>,
    // lower Cholesky factor, row-major d x d
    chol: Vec<f64>,
    t: StudentT,
    chi: ChiSquared<f64>,
}

impl TCopula {
    /// `correlation` is a row-major `d x d` matrix.
    pub fn new(correlation: Vec<f64>, d: usize, dof: f64) -> Result<Self> {
        if d == 0 || correlation.len() != d * d {
            return Err(MesError::InvalidModel(format!(
                "correlation matrix has {} entries, expected {}",
                correlation.len(),
                d * d
            )));
        }
        if !(dof > 0.0 && dof.is_finite()) {
            return Err(MesError::InvalidModel(format!("t copula degrees of freedom {dof}")));
        }
        for i in 0..d {
            if (correlation[i * d + i] - 1.0).abs() > 1e-12 {
                return Err(MesError::InvalidModel("correlation diagonal must be 1".into()));
            }
            for j in 0..i {
                let (a, b) = (correlation[i * d + j], correlation[j * d + i]);
                if !a.is_finite() || (a - b).abs() > 1e-12 {
                    return Err(MesError::InvalidModel("correlation matrix not symmetric".into()));
                }
            }
        }
        let chol = cholesky(&correlation, d)
            .ok_or_else(|| MesError::InvalidModel("correlation matrix not positive definite".into()))?;
        let chi = ChiSquared::new(dof).map_err(|e| MesError::InvalidModel(e.to_string()))?;
        Ok(Self { d, dof, correlation, chol, t: StudentT::new(dof), chi })
    }

    /// All off-diagonal correlations equal to `rho`.
    pub fn equicorrelated(d: usize, rho: f64, dof: f64) -> Result<Self> {
        let mut c = vec![rho; d * d];
        for i in 0..d {
            c[i * d + i] = 1.0;
        }
        Self::new(c, d, dof)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn dof(&self) -> f64 {
        self.dof
    }

    pub fn correlation(&self) -> &[f64] {
        &self.correlation
    }
}

fn cholesky(a: &[f64], d: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..=i {
            let mut s = a[i * d + j];
            for k in 0..j {
                s -= l[i * d + k] * l[j * d + k];
            }
            if i == j {
                if !(s > 1e-12) {
                    return None;
                }
                l[i * d + i] = s.sqrt();
            } else {
                l[i * d + j] = s / l[j * d + j];
            }
        }
    }
    Some(l)
}

impl Copula {
    pub fn clayton(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(MesError::InvalidModel(format!("Clayton delta must be positive, got {delta}")));
        }
        let frailty = Gamma::new(1.0 / delta, 1.0).map_err(|e| MesError::InvalidModel(e.to_string()))?;
        Ok(Copula::Clayton { delta, frailty })
    }

    pub fn gumbel(theta: f64) -> Result<Self> {
        if !(theta >= 1.0 && theta.is_finite()) {
            return Err(MesError::InvalidModel(format!("Gumbel theta must be >= 1, got {theta}")));
        }
        Ok(Copula::Gumbel { theta })
    }

    pub fn joe(theta: f64) -> Result<Self> {
        if !(theta >= 1.0 && theta.is_finite()) {
            return Err(MesError::InvalidModel(format!("Joe theta must be >= 1, got {theta}")));
        }
        Ok(Copula::Joe { theta })
    }

    pub fn student_t(correlation: Vec<f64>, d: usize, dof: f64) -> Result<Self> {
        Ok(Copula::StudentT(TCopula::new(correlation, d, dof)?))
    }

    /// Dimension fixed by the copula itself; Archimedean families take any.
    pub fn dim(&self) -> Option<usize> {
        match self {
            Copula::StudentT(t) => Some(t.d),
            _ => None,
        }
    }

    /// Population Kendall's tau between components `i` and `j`.
    pub fn kendall_tau(&self, i: usize, j: usize) -> f64 {
        match self {
            Copula::Clayton { delta, .. } => delta / (delta + 2.0),
            Copula::Gumbel { theta } => 1.0 - 1.0 / theta,
            Copula::Joe { theta } => {
                // 1 - 4 sum_k 1 / (k (theta k + 2)(theta (k - 1) + 2))
                let mut s = 0.0;
                for k in 1..200_000 {
                    let k = k as f64;
                    s += 1.0 / (k * (theta * k + 2.0) * (theta * (k - 1.0) + 2.0));
                }
                1.0 - 4.0 * s
            }
            Copula::StudentT(t) => 2.0 / PI * t.correlation[i * t.d + j].asin(),
        }
    }

    /// Fills `u` with one draw of the copula in dimension `u.len()`.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, u: &mut [f64]) {
        match self {
            Copula::Clayton { delta, frailty } => {
                let v = frailty.sample(rng);
                for x in u.iter_mut() {
                    let e: f64 = Exp1.sample(rng);
                    *x = (-(e / v).ln_1p() / delta).exp();
                }
            }
            Copula::Gumbel { theta } => {
                let alpha = 1.0 / theta;
                let v = positive_stable(rng, alpha);
                for x in u.iter_mut() {
                    let e: f64 = Exp1.sample(rng);
                    *x = (-(e / v).powf(alpha)).exp();
                }
            }
            Copula::Joe { theta } => {
                let alpha = 1.0 / theta;
                let v = sibuya(rng, alpha);
                for x in u.iter_mut() {
                    let e: f64 = Exp1.sample(rng);
                    *x = 1.0 - (-(-e / v).exp_m1()).powf(alpha);
                }
            }
            Copula::StudentT(t) => {
                let d = t.d;
                debug_assert_eq!(u.len(), d);
                for x in u.iter_mut() {
                    *x = StandardNormal.sample(rng);
                }
                let w: f64 = t.chi.sample(rng);
                let scale = (t.dof / w).sqrt();
                // in-place z = L g, from the bottom row up
                for i in (0..d).rev() {
                    let row = &t.chol[i * d..i * d + i + 1];
                    let z: f64 = row.iter().zip(u.iter()).map(|(a, b)| a * b).sum();
                    u[i] = z;
                }
                for x in u.iter_mut() {
                    *x = t.t.cdf(*x * scale);
                }
            }
        }
    }

    /// Parses `clayton:3`, `gumbel:1.25`, `joe:2` or `t:<dof>,<rho>`
    /// (equicorrelated, dimension `d`).
    pub fn parse(s: &str, d: usize) -> Result<Self> {
        let (family, params) = s
            .split_once(':')
            .ok_or_else(|| MesError::Parse(format!("copula '{s}' lacks parameters")))?;
        let p = parse_params(params)?;
        let want = |n: usize| {
            if p.len() == n {
                Ok(())
            } else {
                Err(MesError::Parse(format!("copula '{s}' needs {n} parameter(s)")))
            }
        };
        match family.trim().to_ascii_lowercase().as_str() {
            "clayton" => {
                want(1)?;
                Copula::clayton(p[0])
            }
            "gumbel" => {
                want(1)?;
                Copula::gumbel(p[0])
            }
            "joe" => {
                want(1)?;
                Copula::joe(p[0])
            }
            "t" | "studentt" | "student-t" => {
                want(2)?;
                Ok(Copula::StudentT(TCopula::equicorrelated(d, p[1], p[0])?))
            }
            other => Err(MesError::Parse(format!("unknown copula family '{other}'"))),
        }
    }
}

impl std::fmt::Display for Copula {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Copula::Clayton { delta, .. } => write!(f, "clayton:{delta}"),
            Copula::Gumbel { theta } => write!(f, "gumbel:{theta}"),
            Copula::Joe { theta } => write!(f, "joe:{theta}"),
            Copula::StudentT(t) => {
                let off = if t.d > 1 { t.correlation[1] } else { 0.0 };
                let equi = (0..t.d).all(|i| (0..t.d).all(|j| i == j || t.correlation[i * t.d + j] == off));
                if equi {
                    write!(f, "t:{},{}", t.dof, off)
                } else {
                    write!(f, "t:{} (general correlation, d = {})", t.dof, t.d)
                }
            }
        }
    }
}

/// Positive stable variable with Laplace transform `exp(-t^alpha)`, by
/// Kanter's representation with one uniform angle and one exponential.
pub fn positive_stable<R: Rng + ?Sized>(rng: &mut R, alpha: f64) -> f64 {
    if alpha >= 1.0 {
        return 1.0;
    }
    let angle = PI * rng.sample::<f64, _>(Open01);
    let w: f64 = Exp1.sample(rng);
    let ln_s = (alpha * angle).sin().ln() - angle.sin().ln() / alpha
        + (1.0 - alpha) / alpha * (((1.0 - alpha) * angle).sin().ln() - w.ln());
    ln_s.exp()
}

/// Sibuya variable: `P(V = 1) = alpha` and
/// `P(V > k) = prod_{j<=k} (j - alpha)/j = Gamma(k+1-alpha)/(Gamma(k+1) Gamma(1-alpha))`,
/// drawn by inversion. Returned as `f64` since its tail is too heavy for
/// fixed-width integers.
pub fn sibuya<R: Rng + ?Sized>(rng: &mut R, alpha: f64) -> f64 {
    if alpha >= 1.0 {
        return 1.0;
    }
    let w: f64 = rng.sample(Open01);
    // smallest k with P(V > k) <= w
    let mut surv = 1.0;
    for k in 1..=256u32 {
        surv *= (k as f64 - alpha) / k as f64;
        if surv <= w {
            return k as f64;
        }
    }
    let ln_g = ln_gamma(1.0 - alpha);
    let ln_surv = |k: f64| ln_gamma(k + 1.0 - alpha) - ln_gamma(k + 1.0) - ln_g;
    let target = w.ln();
    let mut lo = 256.0f64;
    let mut hi = 512.0f64;
    while ln_surv(hi) > target {
        lo = hi;
        hi *= 2.0;
        if hi > 1e300 {
            return hi;
        }
    }
    // ln_surv(lo) > target >= ln_surv(hi)
    while hi - lo > 1.0 {
        let mid = (0.5 * (lo + hi)).floor();
        if mid <= lo || mid >= hi {
            break;
        }
        if ln_surv(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}
