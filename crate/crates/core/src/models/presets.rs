//! The five benchmark models and their reference MES values at `tau = 0.998`.

use super::copula::{Copula, TCopula};
use super::marginal::Marginal;
use super::ModelSpec;
use crate::error::{MesError, Result};

pub const PRESET_NAMES: [&str; 5] = ["model_i", "model_ii", "model_iii", "model_iv", "model_v"];

/// Level of the reference values.
pub const REFERENCE_TAU: f64 = 0.998;

/// Gumbel parameter of model (ii); the published dependence value 0.8 read
/// as the reciprocal of the standard parameter.
pub const MODEL_II_GUMBEL: f64 = 1.0 / 0.8;
/// Gumbel parameter of model (iv), likewise from 0.7.
pub const MODEL_IV_GUMBEL: f64 = 1.0 / 0.7;
/// Degrees of freedom of the model (iii) t copula.
pub const MODEL_III_DOF: f64 = 4.0;
/// Burr `(c, k)` of the second margin of model (iv), with `1/(ck) = 1/5`.
pub const MODEL_IV_BURR: (f64, f64) = (2.23606797749979, 2.23606797749979);

/// Published Monte Carlo values of `theta_j(0.998)`: component 1 for the
/// exchangeable models, all four components for model (iv).
pub fn reference_mes(name: &str) -> Option<&'static [f64]> {
    match canonical(name)? {
        "model_i" => Some(&[16.58656]),
        "model_ii" => Some(&[10.09849]),
        "model_iii" => Some(&[5.270914]),
        "model_iv" => Some(&[6.965690, 3.783465, 3.875493, 3.869831]),
        "model_v" => Some(&[6.738795]),
        _ => None,
    }
}

/// Reference values expanded to every component: exchangeable models repeat
/// the single published value.
pub fn reference_truth(name: &str) -> Option<Vec<f64>> {
    let vals = reference_mes(name)?;
    let d = preset(name).ok()?.d();
    Some(if vals.len() == d { vals.to_vec() } else { vec![vals[0]; d] })
}

/// Component whose intervals are reported: the Burr margin for model (iv),
/// the first otherwise.
pub fn interval_component(name: &str) -> usize {
    match canonical(name) {
        Some("model_iv") => 1,
        _ => 0,
    }
}

fn canonical(name: &str) -> Option<&'static str> {
    let key = name.trim().to_ascii_lowercase().replace(['-', ' '], "_");
    let key = key.strip_prefix("model_").unwrap_or(&key).to_string();
    let idx = match key.as_str() {
        "i" | "1" => 0,
        "ii" | "2" => 1,
        "iii" | "3" => 2,
        "iv" | "4" => 3,
        "v" | "5" => 4,
        _ => return None,
    };
    Some(PRESET_NAMES[idx])
}

/// Looks up a preset by `model_i`..`model_v` (also `i`..`v`, `1`..`5`).
pub fn preset(name: &str) -> Result<ModelSpec> {
    match canonical(name) {
        Some("model_i") => model_i(),
        Some("model_ii") => model_ii(MODEL_II_GUMBEL),
        Some("model_iii") => model_iii(MODEL_III_DOF),
        Some("model_iv") => model_iv(MODEL_IV_GUMBEL, MODEL_IV_BURR),
        Some("model_v") => model_v(),
        _ => Err(MesError::InvalidModel(format!(
            "unknown preset '{name}', expected one of {}",
            PRESET_NAMES.join(", ")
        ))),
    }
}

/// Clayton(3) copula with half-t(5/2) margins.
pub fn model_i() -> Result<ModelSpec> {
    ModelSpec::new("model_i", Copula::clayton(3.0)?, vec![Marginal::half_t(2.5)?; 2])
}

/// Gumbel copula with Burr(sqrt 3, sqrt 3) margins.
pub fn model_ii(gumbel_theta: f64) -> Result<ModelSpec> {
    let s3 = 3f64.sqrt();
    ModelSpec::new("model_ii", Copula::gumbel(gumbel_theta)?, vec![Marginal::burr(s3, s3)?; 2])
}

/// t copula with correlation 0.8 and Burr(2, 2) margins.
pub fn model_iii(dof: f64) -> Result<ModelSpec> {
    ModelSpec::new(
        "model_iii",
        Copula::StudentT(TCopula::equicorrelated(2, 0.8, dof)?),
        vec![Marginal::burr(2.0, 2.0)?; 2],
    )
}

/// Gumbel copula with half-t(5), Burr, Frechet(5) and Pareto(1/5) margins.
pub fn model_iv(gumbel_theta: f64, burr: (f64, f64)) -> Result<ModelSpec> {
    ModelSpec::new(
        "model_iv",
        Copula::gumbel(gumbel_theta)?,
        vec![
            Marginal::half_t(5.0)?,
            Marginal::burr(burr.0, burr.1)?,
            Marginal::frechet(5.0)?,
            Marginal::pareto(0.2)?,
        ],
    )
}

/// 15-dimensional t(4) copula, correlation 0.4, half-t(4) margins.
pub fn model_v() -> Result<ModelSpec> {
    ModelSpec::new(
        "model_v",
        Copula::StudentT(TCopula::equicorrelated(15, 0.4, 4.0)?),
        vec![Marginal::half_t(4.0)?; 15],
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_resolve() {
        for (i, name) in PRESET_NAMES.iter().enumerate() {
            let spec = preset(name).unwrap();
            assert_eq!(spec.name(), *name);
            assert_eq!(reference_truth(name).unwrap().len(), spec.d());
            assert_eq!(preset(&(i + 1).to_string()).unwrap().name(), *name);
        }
        assert_eq!(preset("IV").unwrap().d(), 4);
        assert_eq!(preset("model_v").unwrap().d(), 15);
        assert!(matches!(preset("model_vi"), Err(MesError::InvalidModel(_))));
    }

    #[test]
    fn margins_have_published_tail_indices() {
        let expected = [0.4, 1.0 / 3.0, 0.25, 0.2, 0.25];
        for (name, g) in PRESET_NAMES.iter().zip(expected) {
            for m in preset(name).unwrap().marginals() {
                assert!((m.tail_index() - g).abs() < 1e-12, "{name}");
            }
        }
    }
}
