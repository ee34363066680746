//! Monte Carlo comparison of the MES estimators and intervals over a grid of
//! effective sample sizes.

pub mod output;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::radial_decompose;
use crate::error::{MesError, Result};
use crate::evt::{
    adjusted_mes, auto_s, cai_from_radial, confidence_interval, emp_from_radial, hill_estimate,
    plain_mes, second_order_params, CiKind, MesEstimate, TailFit, Variant,
};
use crate::models::presets::{interval_component, reference_truth};
use crate::models::{preset, sample_model_stream, ModelSpec};

pub use output::{emit_outputs, max_avg_mse, read_curve_csv, CurveRow, MseEnvelope};

/// An interval construction applied to one of the two proposed estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CiSpec {
    pub kind: CiKind,
    pub variant: Variant,
}

impl CiSpec {
    pub const ALL: [CiSpec; 4] = [
        CiSpec { kind: CiKind::Basic, variant: Variant::Plain },
        CiSpec { kind: CiKind::Basic, variant: Variant::Adjusted },
        CiSpec { kind: CiKind::Refined, variant: Variant::Plain },
        CiSpec { kind: CiKind::Refined, variant: Variant::Adjusted },
    ];
}

impl fmt::Display for CiSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.kind, self.variant)
    }
}

/// Parses `basic_plain`, `refined-adjusted` and similar.
impl FromStr for CiSpec {
    type Err = MesError;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, variant) = s
            .split_once(['_', '-', ':'])
            .ok_or_else(|| MesError::Parse(format!("interval '{s}' should read <kind>_<estimator>")))?;
        let spec = CiSpec { kind: kind.parse()?, variant: variant.parse()? };
        if !matches!(spec.variant, Variant::Plain | Variant::Adjusted) {
            return Err(MesError::Parse(format!("no interval for the {} estimator", spec.variant)));
        }
        Ok(spec)
    }
}

/// Which components an estimator or interval is evaluated on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Components {
    One(usize),
    All,
}

impl Components {
    fn resolve(self, d: usize) -> Result<Vec<usize>> {
        match self {
            Components::All => Ok((0..d).collect()),
            Components::One(j) if j < d => Ok(vec![j]),
            Components::One(j) => Err(MesError::InvalidInput(format!("component {} out of range for d = {d}", j + 1))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub n: usize,
    pub replicates: usize,
    pub tau: f64,
    pub k_grid: Vec<usize>,
    pub estimators: Vec<Variant>,
    pub intervals: Vec<CiSpec>,
    pub alpha: f64,
    pub components: Components,
    pub interval_components: Components,
    pub master_seed: u64,
    /// True `theta_j(tau)` for every model component.
    pub truth: Option<Vec<f64>>,
    /// Second-order level; automatic when `None`.
    pub second_order_s: Option<usize>,
}

/// `k = round(f n)` for `f = 1%, 2%, .., 30%`, deduplicated.
pub fn default_k_grid(n: usize) -> Vec<usize> {
    let mut g: Vec<usize> = (1..=30)
        .map(|p| ((p as f64 / 100.0) * n as f64).round() as usize)
        .filter(|&k| k >= 1 && k < n)
        .collect();
    g.dedup();
    g
}

/// `k = round(f n)` for the given fractions.
pub fn k_grid_from_fractions(n: usize, fractions: &[f64]) -> Vec<usize> {
    fractions.iter().map(|f| (f * n as f64).round() as usize).collect()
}

impl ExperimentConfig {
    /// The published protocol for a preset at desk scale: `n = 500`,
    /// `M = 1000`, `tau = 0.998`, `k/n` from 1% to 30%, all estimators and
    /// intervals at the 5% level, reference truth.
    pub fn for_preset(name: &str) -> Result<Self> {
        let model = preset(name)?;
        let all = model.name() == "model_iv";
        let n = 500;
        Ok(Self {
            truth: reference_truth(name),
            n,
            replicates: 1000,
            tau: 0.998,
            k_grid: default_k_grid(n),
            estimators: Variant::ALL.to_vec(),
            intervals: CiSpec::ALL.to_vec(),
            alpha: 0.05,
            components: if all { Components::All } else { Components::One(0) },
            interval_components: Components::One(interval_component(name)),
            master_seed: 1,
            second_order_s: None,
            model,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(MesError::InvalidInput(format!("sample size {} too small", self.n)));
        }
        if self.replicates == 0 {
            return Err(MesError::InvalidInput("at least one replicate is required".into()));
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(MesError::InvalidTau(self.tau));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(MesError::InvalidAlpha(self.alpha));
        }
        if self.k_grid.is_empty() || self.k_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(MesError::InvalidInput("k grid must be nonempty and strictly increasing".into()));
        }
        if let Some(&k) = self.k_grid.iter().find(|&&k| k == 0 || k >= self.n) {
            return Err(MesError::InvalidK { k, max: self.n - 1 });
        }
        for ci in &self.intervals {
            if !matches!(ci.variant, Variant::Plain | Variant::Adjusted) {
                return Err(MesError::InvalidInput(format!("no interval for the {} estimator", ci.variant)));
            }
        }
        match &self.truth {
            None => return Err(MesError::MissingTruth),
            Some(t) if t.len() != self.model.d() => {
                return Err(MesError::InvalidInput(format!(
                    "truth has {} values for a {}-dimensional model",
                    t.len(),
                    self.model.d()
                )))
            }
            _ => {}
        }
        self.components.resolve(self.model.d())?;
        self.interval_components.resolve(self.model.d())?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    pub k: usize,
    pub mean: f64,
    pub squared_bias: f64,
    pub variance: f64,
    pub mse: f64,
    pub successes: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimatorCurve {
    pub estimator: Variant,
    /// Zero-based model component.
    pub component: usize,
    pub truth: f64,
    pub points: Vec<CurvePoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoveragePoint {
    pub k: usize,
    pub non_coverage: f64,
    pub successes: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageCurve {
    pub interval: CiSpec,
    pub component: usize,
    pub points: Vec<CoveragePoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveResult {
    pub model: String,
    pub n: usize,
    pub replicates: usize,
    pub tau: f64,
    pub alpha: f64,
    pub k_grid: Vec<usize>,
    pub estimators: Vec<EstimatorCurve>,
    pub coverage: Vec<CoverageCurve>,
}

impl CurveResult {
    pub fn estimator_curve(&self, estimator: Variant, component: usize) -> Option<&EstimatorCurve> {
        self.estimators.iter().find(|c| c.estimator == estimator && c.component == component)
    }

    pub fn coverage_curve(&self, interval: CiSpec, component: usize) -> Option<&CoverageCurve> {
        self.coverage.iter().find(|c| c.interval == interval && c.component == component)
    }
}

/// Per-replicate outcomes, `values[(e * grid + g) * comps + c]` and
/// `covers[(i * grid + g) * icomps + c]`.
struct Replicate {
    values: Vec<Option<f64>>,
    covers: Vec<Option<bool>>,
}

fn finite(v: Result<f64>) -> Option<f64> {
    v.ok().filter(|x| x.is_finite())
}

fn run_replicate(cfg: &ExperimentConfig, m: usize, comps: &[usize], icomps: &[usize], truth: &[f64]) -> Replicate {
    let grid = cfg.k_grid.len();
    let mut values = vec![None; cfg.estimators.len() * grid * comps.len()];
    let mut covers = vec![None; cfg.intervals.len() * grid * icomps.len()];
    let batch = match sample_model_stream(&cfg.model, cfg.n, cfg.master_seed, m as u64) {
        Ok(b) => b,
        Err(_) => return Replicate { values, covers },
    };
    let x = &batch.data;
    let r = radial_decompose(x);
    let needs_so = cfg.estimators.contains(&Variant::Adjusted)
        || cfg.intervals.iter().any(|c| c.variant == Variant::Adjusted || c.variant == Variant::Plain);
    let so = if needs_so {
        second_order_params(&r, cfg.second_order_s.unwrap_or_else(|| auto_s(&r))).ok()
    } else {
        None
    };
    for (g, &k) in cfg.k_grid.iter().enumerate() {
        let plain = plain_mes(&r, k, cfg.tau).ok();
        let adjusted = so.as_ref().and_then(|so| adjusted_mes(&r, k, cfg.tau, so).ok());
        let pick = |v: Variant| -> Option<&MesEstimate> {
            match v {
                Variant::Plain => plain.as_ref(),
                Variant::Adjusted => adjusted.as_ref(),
                _ => None,
            }
        };
        for (e, &est) in cfg.estimators.iter().enumerate() {
            for (c, &j) in comps.iter().enumerate() {
                let v = match est {
                    Variant::Plain | Variant::Adjusted => pick(est).map(|m| m.theta_hat[j]).filter(|v| v.is_finite()),
                    Variant::Emp => finite(emp_from_radial(x, &r, j, k, cfg.tau)),
                    Variant::Cai => finite(cai_from_radial(x, &r, j, k, cfg.tau)),
                };
                values[(e * grid + g) * comps.len() + c] = v;
            }
        }
        if cfg.intervals.is_empty() {
            continue;
        }
        let Ok(gamma_hat) = hill_estimate(&r, k) else { continue };
        let fit = TailFit { gamma_hat, k, second_order: so };
        for (i, ci) in cfg.intervals.iter().enumerate() {
            let Some(est) = pick(ci.variant) else { continue };
            let Ok(bounds) = confidence_interval(est, &fit, ci.kind, cfg.alpha) else { continue };
            for (c, &j) in icomps.iter().enumerate() {
                let b = &bounds[j];
                if b.lower.is_finite() && b.upper.is_finite() {
                    covers[(i * grid + g) * icomps.len() + c] = Some(b.contains(truth[j]));
                }
            }
        }
    }
    Replicate { values, covers }
}

fn summarize(k: usize, xs: &[f64], failures: usize, truth: f64) -> CurvePoint {
    let m = xs.len();
    if m == 0 {
        return CurvePoint {
            k,
            mean: f64::NAN,
            squared_bias: f64::NAN,
            variance: f64::NAN,
            mse: f64::NAN,
            successes: 0,
            failures,
        };
    }
    let mf = m as f64;
    let mean = xs.iter().sum::<f64>() / mf;
    let variance = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / mf;
    let mse = xs.iter().map(|x| (x - truth) * (x - truth)).sum::<f64>() / mf;
    CurvePoint { k, mean, squared_bias: (mean - truth) * (mean - truth), variance, mse, successes: m, failures }
}

/// Runs the experiment on the current rayon pool. Replicate `m` draws its
/// sample from stream `m` of the master seed and results are aggregated in
/// replicate order, so the outcome does not depend on the number of threads.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<CurveResult> {
    cfg.validate()?;
    let truth = cfg.truth.clone().ok_or(MesError::MissingTruth)?;
    let d = cfg.model.d();
    let comps = cfg.components.resolve(d)?;
    let icomps = cfg.interval_components.resolve(d)?;
    let grid = cfg.k_grid.len();
    let reps: Vec<Replicate> = (0..cfg.replicates)
        .into_par_iter()
        .map(|m| run_replicate(cfg, m, &comps, &icomps, &truth))
        .collect();

    let mut estimators = Vec::new();
    for (e, &est) in cfg.estimators.iter().enumerate() {
        for (c, &j) in comps.iter().enumerate() {
            let points = cfg
                .k_grid
                .iter()
                .enumerate()
                .map(|(g, &k)| {
                    let idx = (e * grid + g) * comps.len() + c;
                    let xs: Vec<f64> = reps.iter().filter_map(|r| r.values[idx]).collect();
                    summarize(k, &xs, cfg.replicates - xs.len(), truth[j])
                })
                .collect();
            estimators.push(EstimatorCurve { estimator: est, component: j, truth: truth[j], points });
        }
    }
    let mut coverage = Vec::new();
    for (i, &ci) in cfg.intervals.iter().enumerate() {
        for (c, &j) in icomps.iter().enumerate() {
            let points = cfg
                .k_grid
                .iter()
                .enumerate()
                .map(|(g, &k)| {
                    let idx = (i * grid + g) * icomps.len() + c;
                    let hits: Vec<bool> = reps.iter().filter_map(|r| r.covers[idx]).collect();
                    let misses = hits.iter().filter(|h| !**h).count();
                    CoveragePoint {
                        k,
                        non_coverage: if hits.is_empty() { f64::NAN } else { misses as f64 / hits.len() as f64 },
                        successes: hits.len(),
                        failures: cfg.replicates - hits.len(),
                    }
                })
                .collect();
            coverage.push(CoverageCurve { interval: ci, component: j, points });
        }
    }
    Ok(CurveResult {
        model: cfg.model.name().to_string(),
        n: cfg.n,
        replicates: cfg.replicates,
        tau: cfg.tau,
        alpha: cfg.alpha,
        k_grid: cfg.k_grid.clone(),
        estimators,
        coverage,
    })
}
