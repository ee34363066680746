//! Copula + marginal models and their samplers.

pub mod copula;
pub mod diagnostics;
pub mod marginal;
pub mod presets;
pub mod series;

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use copula::{Copula, TCopula};
pub use marginal::Marginal;
pub use presets::{preset, reference_mes, reference_truth, PRESET_NAMES};

use crate::data::DataMatrix;
use crate::error::{MesError, Result};

/// Independent reproducible generator for `(seed, stream)`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// A copula together with one marginal law per component.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    name: String,
    copula: Copula,
    marginals: Vec<Marginal>,
}

impl ModelSpec {
    pub fn new(name: impl Into<String>, copula: Copula, marginals: Vec<Marginal>) -> Result<Self> {
        if marginals.is_empty() {
            return Err(MesError::InvalidModel("at least one marginal is required".into()));
        }
        if let Some(d) = copula.dim() {
            if d != marginals.len() {
                return Err(MesError::InvalidModel(format!(
                    "copula dimension {d} but {} marginals",
                    marginals.len()
                )));
            }
        }
        if let Some(m) = marginals.iter().find(|m| m.tail_index() >= 1.0) {
            return Err(MesError::InvalidModel(format!(
                "marginal {m} has tail index {} >= 1; the MES does not exist",
                m.tail_index()
            )));
        }
        Ok(Self { name: name.into(), copula, marginals })
    }

    /// Builds a model from textual copula and marginal descriptions, e.g.
    /// `("clayton:3", ["halft:2.5", "halft:2.5"])`.
    pub fn parse<S: AsRef<str>>(name: &str, copula: &str, marginals: &[S]) -> Result<Self> {
        let marginals = marginals
            .iter()
            .map(|m| m.as_ref().parse::<Marginal>())
            .collect::<Result<Vec<_>>>()?;
        let copula = Copula::parse(copula, marginals.len())?;
        Self::new(name, copula, marginals)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn d(&self) -> usize {
        self.marginals.len()
    }

    pub fn copula(&self) -> &Copula {
        &self.copula
    }

    pub fn marginals(&self) -> &[Marginal] {
        &self.marginals
    }

    pub fn tail_indices(&self) -> Vec<f64> {
        self.marginals.iter().map(Marginal::tail_index).collect()
    }

    /// One draw: copula uniforms in `u`, margins applied in `x`.
    pub fn sample_row<R: rand::Rng + ?Sized>(&self, rng: &mut R, u: &mut [f64], x: &mut [f64]) {
        self.copula.sample_into(rng, u);
        for ((xj, &uj), m) in x.iter_mut().zip(u.iter()).zip(&self.marginals) {
            *xj = m.quantile_unchecked(uj);
        }
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{}; ", self.name, self.copula)?;
        for (i, m) in self.marginals.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{m}")?;
        }
        f.write_str("]")
    }
}

/// A simulated data set with the seed that produced it.
#[derive(Debug, Clone)]
pub struct SampleBatch {
    pub data: DataMatrix,
    pub seed: u64,
    pub stream: u64,
    pub model: String,
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(MesError::InvalidInput("sample size must be at least 1".into()));
    }
    Ok(())
}

/// `n x d` draws of the copula alone.
pub fn sample_copula(spec: &ModelSpec, n: usize, seed: u64) -> Result<DataMatrix> {
    check_n(n)?;
    let d = spec.d();
    let mut rng = stream_rng(seed, 0);
    let mut values = vec![0.0; n * d];
    for row in values.chunks_exact_mut(d) {
        spec.copula.sample_into(&mut rng, row);
    }
    DataMatrix::new(n, d, values)
}

/// `n` draws of the full model from stream 0 of `seed`.
pub fn sample_model(spec: &ModelSpec, n: usize, seed: u64) -> Result<SampleBatch> {
    sample_model_stream(spec, n, seed, 0)
}

/// `n` draws of the full model from the given stream of `seed`. The copula
/// uniforms are those of [`sample_copula`] on stream 0.
pub fn sample_model_stream(spec: &ModelSpec, n: usize, seed: u64, stream: u64) -> Result<SampleBatch> {
    check_n(n)?;
    let d = spec.d();
    let mut rng = stream_rng(seed, stream);
    let mut values = vec![0.0; n * d];
    let mut u = vec![0.0; d];
    for row in values.chunks_exact_mut(d) {
        spec.sample_row(&mut rng, &mut u, row);
    }
    Ok(SampleBatch { data: DataMatrix::new(n, d, values)?, seed, stream, model: spec.name.clone() })
}
